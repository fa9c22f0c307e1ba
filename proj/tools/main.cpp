#include "crystal/cli.hpp"

int main(int argc, char** argv) { return crystal::cli::run(argc, argv); }
