#include "rcov/cli.hpp"

int main(int argc, char** argv) { return rcov::cli::main_entry(argc, argv); }
