#include "scrip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace scrip {

namespace {

struct Group {
  int start = 0;
  int count = 0;
  double alpha = 0.0, beta = 1.0, gamma = 0.0, rho = 1.0;
  long long threshold = -1;  // -1: volunteer at every wealth (hoarders)
  bool standard = false;
  bool paid = false;      // participates in the paid-volunteer pool
  bool requests = false;  // can be the round's requester
  std::vector<int> willing;
};

}  // namespace

SimResult run_simulation(const SimConfig& cfg) {
  const Population& p = cfg.population;
  validate_population(p);
  if (cfg.profile.size() != p.types.size())
    throw ParameterRangeError("profile has one threshold per standard type");
  for (int k : cfg.profile)
    if (k < 0) throw ParameterRangeError("negative threshold in simulation profile");
  if (cfg.rounds < 1) throw ParameterRangeError("simulation needs rounds >= 1");
  if (cfg.burn_in < 0) throw ParameterRangeError("burn_in must be >= 0");
  if (cfg.record_interval < 1) throw ParameterRangeError("record_interval must be >= 1");
  if (!(cfg.mean_money >= 0.0) || !std::isfinite(cfg.mean_money))
    throw ParameterRangeError("mean_money must be finite and >= 0");
  if (p.n > 100'000'000) throw ParameterRangeError("population too large to simulate");

  // Materialise groups: standard types, then hoarders, altruists last so the
  // moneyed agents occupy a contiguous id prefix.
  std::vector<double> weights;
  for (const auto& ts : p.types) weights.push_back(ts.fraction);
  weights.push_back(p.hoarder_fraction);
  weights.push_back(p.altruist_fraction);
  std::vector<int> counts = apportion_counts(weights, p.n);

  std::vector<Group> groups;
  int cursor = 0;
  for (size_t i = 0; i < p.types.size(); ++i) {
    Group g;
    g.start = cursor;
    g.count = counts[i];
    g.alpha = p.types[i].type.alpha;
    g.beta = p.types[i].type.beta;
    g.gamma = p.types[i].type.gamma;
    g.rho = p.types[i].type.rho;
    g.threshold = cfg.profile[i];
    g.standard = true;
    g.paid = true;
    g.requests = true;
    cursor += g.count;
    groups.push_back(std::move(g));
  }
  int n_hoarders = counts[p.types.size()];
  if (n_hoarders > 0) {
    AgentType ht = resolve_hoarder_type(p);
    Group g;
    g.start = cursor;
    g.count = n_hoarders;
    g.alpha = ht.alpha;
    g.beta = ht.beta;
    g.gamma = ht.gamma;
    g.rho = ht.rho;
    g.threshold = -1;
    g.standard = false;
    g.paid = true;
    g.requests = cfg.hoarders_request;
    cursor += g.count;
    groups.push_back(std::move(g));
  }
  int n_altruists = counts[p.types.size() + 1];
  int n_moneyed = p.n - n_altruists;
  if (n_moneyed < 1) throw ConfigError("population rounds to altruists only");

  long long money_total = llround(cfg.mean_money * double(n_moneyed));
  if (money_total > 2'000'000'000LL)
    throw ParameterRangeError("total money supply too large to simulate");

  std::mt19937_64 rng(cfg.seed);

  // Initial allocation: floor(m) dollars each, then one extra dollar to each
  // of `rem` distinct uniformly chosen moneyed agents.
  std::vector<int> money(size_t(p.n), 0);
  {
    long long base = (long long)std::floor(cfg.mean_money);
    long long rem = money_total - base * n_moneyed;
    if (base >= std::numeric_limits<int>::max() - 1)
      throw ParameterRangeError("per-agent money does not fit an int");
    if (rem < 0 || rem > n_moneyed) {  // only possible through float edge cases
      base = money_total / n_moneyed;
      rem = money_total % n_moneyed;
    }
    for (int i = 0; i < n_moneyed; ++i) money[size_t(i)] = int(base);
    std::vector<int> ids(static_cast<size_t>(n_moneyed));
    std::iota(ids.begin(), ids.end(), 0);
    for (long long i = 0; i < rem; ++i) {
      long long j =
          std::uniform_int_distribution<long long>(i, n_moneyed - 1)(rng);
      std::swap(ids[size_t(i)], ids[size_t(j)]);
      money[size_t(ids[size_t(i)])] += 1;
    }
  }

  std::vector<int> group_of(size_t(p.n), -1);
  for (size_t gi = 0; gi < groups.size(); ++gi)
    for (int i = 0; i < groups[gi].count; ++i) group_of[size_t(groups[gi].start + i)] = int(gi);

  std::vector<int> wpos(size_t(p.n), -1);
  auto refresh_willing = [&](int agent) {
    Group& g = groups[size_t(group_of[size_t(agent)])];
    if (!g.paid) return;
    bool want = g.threshold < 0 || money[size_t(agent)] < g.threshold;
    int pos = wpos[size_t(agent)];
    if (want && pos < 0) {
      wpos[size_t(agent)] = int(g.willing.size());
      g.willing.push_back(agent);
    } else if (!want && pos >= 0) {
      int last = g.willing.back();
      g.willing[size_t(pos)] = last;
      wpos[size_t(last)] = pos;
      g.willing.pop_back();
      wpos[size_t(agent)] = -1;
    }
  };
  for (int i = 0; i < n_moneyed; ++i) refresh_willing(i);

  // Requester sampling weights are fixed: counts never change.
  double total_req_weight = 0.0;
  for (const Group& g : groups)
    if (g.requests) total_req_weight += g.rho * double(g.count);
  if (total_req_weight <= 0.0) throw ConfigError("no requesting agents");

  // Money histogram, time-averaged after burn-in. With record_interval == 1
  // every level's occupancy is integrated exactly (touched lazily, only when
  // it changes); wider intervals fall back to periodic snapshots.
  const bool exact_integral = cfg.record_interval == 1;
  std::vector<long long> hist(size_t(money_total) + 1, 0);
  for (int i = 0; i < n_moneyed; ++i) hist[size_t(money[size_t(i)])]++;
  std::vector<long long> integral(hist.size(), 0);
  std::vector<long long> last_touch(hist.size(), 0);
  std::vector<long long> samples(hist.size(), 0);
  long long sample_count = 0;
  long long now = 0;
  auto touch = [&](int level) {
    if (!exact_integral) return;
    integral[size_t(level)] += hist[size_t(level)] * (now - last_touch[size_t(level)]);
    last_touch[size_t(level)] = now;
  };

  std::optional<double> per_round_discount;
  {
    std::optional<double> d;
    bool common = true;
    for (const auto& ts : p.types) {
      if (!d)
        d = ts.type.delta;
      else if (ts.type.delta != *d)
        common = false;
    }
    if (common && d) per_round_discount = std::pow(*d, 1.0 / double(p.n));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SimResult out;
  out.rounds_run = cfg.rounds;
  out.burn_in_run = cfg.burn_in;
  out.seed = cfg.seed;
  out.money_total = money_total;
  out.n_hoarders = n_hoarders;
  out.n_altruists = n_altruists;
  out.n_standard = n_moneyed - n_hoarders;

  double util_acc = 0.0;
  double disc_acc = 0.0;
  double disc_pow = 1.0;
  long long willing_acc = 0;
  const long long total_rounds = cfg.burn_in + cfg.rounds;
  std::vector<int> able(groups.size(), 0);

  auto set_money = [&](int agent, int value) {
    touch(money[size_t(agent)]);
    touch(value);
    hist[size_t(money[size_t(agent)])]--;
    hist[size_t(value)]++;
    money[size_t(agent)] = value;
    refresh_willing(agent);
  };

  for (long long r = 0; r < total_rounds; ++r) {
    now = r;
    if (r == cfg.burn_in) {
      // Measurement starts here: restart the occupancy integrals.
      std::fill(integral.begin(), integral.end(), 0);
      std::fill(last_touch.begin(), last_touch.end(), r);
    }
    const bool measuring = r >= cfg.burn_in;
    if (measuring && !exact_integral &&
        (r - cfg.burn_in) % cfg.record_interval == 0) {
      for (size_t L = 0; L < hist.size(); ++L) samples[L] += hist[L];
      ++sample_count;
    }
    double util = 0.0;

    // Requester: one request per round, rho-weighted over moneyed agents.
    double x = unit(rng) * total_req_weight;
    size_t gi = 0;
    for (; gi + 1 < groups.size(); ++gi) {
      if (!groups[gi].requests) continue;
      double w = groups[gi].rho * double(groups[gi].count);
      if (x < w) break;
      x -= w;
    }
    while (!groups[gi].requests) --gi;  // skip non-requesting tail groups
    Group& gr = groups[gi];
    int req = gr.start;
    if (gr.count > 1)
      req += std::uniform_int_distribution<int>(0, gr.count - 1)(rng);

    if (measuring) {
      long long wsum = 0;
      for (const Group& g : groups)
        if (g.paid) wsum += (long long)g.willing.size();
      willing_acc += wsum;
    }

    if (money[size_t(req)] == 0) {
      if (n_altruists > 0) {
        out.free_trades += measuring;
        if (gr.standard) util += gr.gamma;
      } else {
        out.unserved += measuring;
      }
    } else {
      // Thin each willing pool by its ability rate; the requester never
      // serves itself.
      long long able_total = n_altruists;
      size_t npaid = 0;
      for (size_t h = 0; h < groups.size(); ++h) {
        const Group& g = groups[h];
        if (!g.paid) continue;
        int w = int(g.willing.size());
        if (h == gi && wpos[size_t(req)] >= 0) --w;
        int b;
        if (g.beta >= 1.0)
          b = w;
        else
          b = std::binomial_distribution<int>(w, g.beta)(rng);
        able[npaid++] = b;
        able_total += b;
      }
      if (able_total == 0) {
        out.unserved += measuring;
      } else {
        long long pick =
            std::uniform_int_distribution<long long>(0, able_total - 1)(rng);
        if (pick < n_altruists) {
          out.free_trades += measuring;
          if (gr.standard) util += gr.gamma;
        } else {
          pick -= n_altruists;
          size_t h = 0, slot = 0;
          for (; h < groups.size(); ++h) {
            if (!groups[h].paid) continue;
            if (pick < able[slot]) break;
            pick -= able[slot];
            ++slot;
          }
          Group& gs = groups[h];
          int w = int(gs.willing.size());
          int skip = (h == gi && wpos[size_t(req)] >= 0) ? wpos[size_t(req)] : -1;
          if (skip >= 0) --w;
          int j = w > 1 ? std::uniform_int_distribution<int>(0, w - 1)(rng) : 0;
          if (skip >= 0 && j >= skip) ++j;
          int server = gs.willing[size_t(j)];

          set_money(req, money[size_t(req)] - 1);
          set_money(server, money[size_t(server)] + 1);
          out.paid_trades += measuring;
          if (gr.standard) util += gr.gamma;
          util -= gs.alpha;
        }
      }
    }

    if (measuring) {
      util_acc += util;
      if (per_round_discount) {
        disc_acc += disc_pow * util;
        disc_pow *= *per_round_discount;
      }
    }
  }

  out.distribution.resize(hist.size());
  if (exact_integral) {
    now = total_rounds;
    for (size_t L = 0; L < hist.size(); ++L) touch(int(L));
    double denom = double(cfg.rounds) * double(n_moneyed);
    for (size_t L = 0; L < hist.size(); ++L)
      out.distribution[L] = double(integral[L]) / denom;
  } else {
    double denom = double(sample_count) * double(n_moneyed);
    for (size_t L = 0; L < hist.size(); ++L)
      out.distribution[L] = double(samples[L]) / denom;
  }
  while (out.distribution.size() > 1 && out.distribution.back() == 0.0)
    out.distribution.pop_back();

  out.welfare_rate = util_acc / double(cfg.rounds);
  out.free_service_fraction = double(out.free_trades) / double(cfg.rounds);
  out.unserved_fraction = double(out.unserved) / double(cfg.rounds);
  out.mean_willing = double(willing_acc) / double(cfg.rounds);
  if (per_round_discount) out.discounted_welfare = disc_acc;
  out.final_money = std::move(money);
  return out;
}

double compare_to_prediction(const SimResult& sim, const MaxEntSolution& predicted) {
  size_t len = std::max(sim.distribution.size(), predicted.aggregate.size());
  double s = 0.0;
  for (size_t i = 0; i < len; ++i) {
    double a = i < sim.distribution.size() ? sim.distribution[i] : 0.0;
    double b = i < predicted.aggregate.size() ? predicted.aggregate[i] : 0.0;
    s += (a - b) * (a - b);
  }
  return std::sqrt(s);
}

}  // namespace scrip
