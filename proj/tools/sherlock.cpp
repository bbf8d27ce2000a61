#include "cli.hpp"

int main(int argc, char** argv) { return sherlock::cli::run(argc, argv); }
