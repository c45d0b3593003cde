#include "pouchsim/cli.hpp"

int main(int argc, char** argv) { return pouchsim::run_cli(argc, argv); }
