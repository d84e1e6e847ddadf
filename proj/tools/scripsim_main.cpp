#include "scrip/cli.hpp"

int main(int argc, char** argv) { return scrip::parse_and_dispatch(argc, argv); }
