#include "dvqn/cli.hpp"

int main(int argc, char** argv) { return dvqn::run_cli(argc, argv); }
