#include "betssm/cli.hpp"

int main(int argc, char** argv) { return betssm::run_cli(argc, argv); }
