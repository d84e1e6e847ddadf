#include "scrip/io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "scrip/errors.hpp"

namespace scrip {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join_thresholds(const StrategyProfile& profile) {
  std::string s;
  for (size_t i = 0; i < profile.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(profile[i]);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double require_number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + " is missing \"" + key + "\"");
  if (!it->is_number()) throw ConfigError(where + " \"" + key + "\" must be a number");
  return it->get<double>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(where + " has unknown key \"" + it.key() + "\"");
  }
}

AgentType parse_type(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  AgentType t;
  t.alpha = require_number(obj, "alpha", where);
  t.beta = require_number(obj, "beta", where);
  t.gamma = require_number(obj, "gamma", where);
  t.delta = require_number(obj, "delta", where);
  t.rho = require_number(obj, "rho", where);
  return t;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw ConfigError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ConfigError("cannot replace " + path);
  }
}

Population parse_population(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("population config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("population config must be a JSON object");
  reject_unknown_keys(
      doc, {"types", "n", "hoarder_fraction", "altruist_fraction", "hoarder_type"},
      "population config");

  Population p;
  auto types_it = doc.find("types");
  if (types_it == doc.end() || !types_it->is_array() || types_it->empty())
    throw ConfigError("population config needs a non-empty \"types\" array");
  for (size_t i = 0; i < types_it->size(); ++i) {
    const json& row = (*types_it)[i];
    std::string where = "types[" + std::to_string(i) + "]";
    reject_unknown_keys(row, {"alpha", "beta", "gamma", "delta", "rho", "fraction"}, where);
    TypeShare ts;
    ts.type = parse_type(row, where);
    ts.fraction = require_number(row, "fraction", where);
    p.types.push_back(ts);
  }

  auto n_it = doc.find("n");
  if (n_it == doc.end() || !n_it->is_number_integer())
    throw ConfigError("population config needs an integer \"n\"");
  long long n = n_it->get<long long>();
  if (n < 0 || n > std::numeric_limits<int>::max())
    throw ConfigError("\"n\" is out of range");
  p.n = int(n);

  if (auto it = doc.find("hoarder_fraction"); it != doc.end()) {
    if (!it->is_number()) throw ConfigError("\"hoarder_fraction\" must be a number");
    p.hoarder_fraction = it->get<double>();
  }
  if (auto it = doc.find("altruist_fraction"); it != doc.end()) {
    if (!it->is_number()) throw ConfigError("\"altruist_fraction\" must be a number");
    p.altruist_fraction = it->get<double>();
  }
  if (auto it = doc.find("hoarder_type"); it != doc.end()) {
    reject_unknown_keys(*it, {"alpha", "beta", "gamma", "delta", "rho"}, "hoarder_type");
    p.hoarder_type = parse_type(*it, "hoarder_type");
  }

  validate_population(p);
  return p;
}

Population load_population(const std::string& path) {
  return parse_population(read_file(path));
}

ObservedDistribution read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + " is empty");

  ObservedDistribution obs;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string money_s, frac_s;
    if (!std::getline(row, money_s, ',') || !std::getline(row, frac_s))
      throw ConfigError(path + ":" + std::to_string(lineno) + " expects money,fraction");
    size_t pos = 0;
    long money = std::stol(money_s, &pos);
    if (pos != money_s.size() || money < 0)
      throw ConfigError(path + ":" + std::to_string(lineno) + " has a bad money level");
    double frac = std::stod(frac_s);
    if (size_t(money) >= obs.fractions.size()) obs.fractions.resize(size_t(money) + 1, 0.0);
    obs.fractions[size_t(money)] = frac;
  }
  while (!obs.fractions.empty() && obs.fractions.back() == 0.0) obs.fractions.pop_back();
  if (obs.fractions.empty()) throw ConfigError(path + " holds no mass");
  return obs;
}

void write_distribution_csv(const std::string& path, const std::vector<double>& fractions) {
  std::string out = "money,fraction\n";
  for (size_t i = 0; i < fractions.size(); ++i)
    out += std::to_string(i) + "," + fmt(fractions[i]) + "\n";
  write_text_file(path, out);
}

void write_per_type_csv(const std::string& path, const MaxEntSolution& sol) {
  std::string out = "type_index,money,fraction\n";
  size_t idx = 0;
  for (const auto& [k, row] : sol.per_threshold) {
    for (size_t i = 0; i < row.size(); ++i)
      out += std::to_string(idx) + "," + std::to_string(i) + "," + fmt(row[i]) + "\n";
    ++idx;
  }
  write_text_file(path, out);
}

namespace {

std::string equilibrium_row(double x, const std::optional<double>& a,
                            const EquilibriumResult& eq, double welfare) {
  std::string row = fmt(x);
  if (a) row += "," + fmt(*a);
  row += eq.crashed ? ",1" : ",0";
  if (eq.solution) {
    row += "," + fmt(eq.solution->lambda);
    row += "," + fmt(eq.solution->zero_fraction);
    row += "," + fmt(eq.solution->at_threshold_fraction);
  } else {
    row += ",,,";
  }
  row += "," + fmt(welfare);
  row += "," + join_thresholds(eq.profile);
  return row + "\n";
}

}  // namespace

void write_equilibrium_csv(const std::string& path, double m, double a,
                           const EquilibriumResult& eq) {
  std::string out = "m,a,crashed,lambda,M0,tau,welfare_rate,thresholds\n";
  out += equilibrium_row(m, a, eq, eq.welfare);
  write_text_file(path, out);
}

void write_sweep_csv(const std::string& path, const std::string& x_name,
                     const std::vector<SweepPoint>& rows) {
  std::string out = x_name + ",crashed,lambda,M0,tau,welfare_rate,thresholds\n";
  for (const SweepPoint& pt : rows) {
    if (!pt.error.empty() || !pt.eq) continue;
    double welfare = pt.welfare ? pt.welfare->per_round : pt.eq->welfare;
    out += equilibrium_row(pt.x, std::nullopt, *pt.eq, welfare);
  }
  write_text_file(path, out);
}

std::string crash_status_name(CrashStatus s) {
  switch (s) {
    case CrashStatus::Bracketed: return "bracketed";
    case CrashStatus::Degenerate: return "degenerate";
    case CrashStatus::HoarderStabilized: return "hoarder_stabilized";
  }
  return "unknown";
}

void write_crash_json(const std::string& path, const CrashSearchResult& r) {
  json doc;
  doc["status"] = crash_status_name(r.status);
  doc["m_crash"] = r.m_crash;
  doc["lower"] = r.lower;
  doc["upper"] = r.upper;
  doc["evaluations"] = r.evaluations;
  write_text_file(path, doc.dump(2) + "\n");
}

void write_explanation_json(const std::string& path, const Explanation& ex) {
  json doc;
  doc["lambda"] = ex.lambda;
  doc["residual"] = ex.residual;
  json support = json::array();
  json pi = json::object();
  for (const auto& [k, f] : ex.mix.entries) {
    support.push_back(k.str());
    pi[k.str()] = f;
  }
  doc["support"] = support;
  doc["pi"] = pi;
  write_text_file(path, doc.dump(2) + "\n");
}

void write_ratio_csv(const std::string& path, const ObservedDistribution& obs) {
  std::string out = "money,fraction,ratio\n";
  for (size_t i = 0; i < obs.fractions.size(); ++i) {
    out += std::to_string(i) + "," + fmt(obs.fractions[i]) + ",";
    if (i > 0 && obs.fractions[i - 1] > 0.0)
      out += fmt(obs.fractions[i] / obs.fractions[i - 1]);
    out += "\n";
  }
  write_text_file(path, out);
}

void write_sim_json(const std::string& path, const SimConfig& cfg, const SimResult& sim) {
  json doc;
  doc["seed"] = sim.seed;
  doc["rounds"] = sim.rounds_run;
  doc["burn_in"] = sim.burn_in_run;
  doc["record_interval"] = cfg.record_interval;
  doc["n"] = cfg.population.n;
  doc["n_standard"] = sim.n_standard;
  doc["n_hoarders"] = sim.n_hoarders;
  doc["n_altruists"] = sim.n_altruists;
  doc["money_total"] = sim.money_total;
  doc["thresholds"] = cfg.profile;
  doc["a_hat"] = sim.free_service_fraction;
  doc["unserved_fraction"] = sim.unserved_fraction;
  doc["welfare_rate"] = sim.welfare_rate;
  if (sim.discounted_welfare) doc["discounted_welfare"] = *sim.discounted_welfare;
  doc["paid_trades"] = sim.paid_trades;
  doc["free_trades"] = sim.free_trades;
  doc["unserved"] = sim.unserved;
  doc["mean_willing"] = sim.mean_willing;
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace scrip
