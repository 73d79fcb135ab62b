#include "commands.hpp"

int main(int argc, char **argv) { return plates::cli::run(argc, argv); }
