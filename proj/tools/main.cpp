#include "semipartm/cli/commands.hpp"

int main(int argc, char** argv) { return semipartm::cli::run(argc, argv); }
