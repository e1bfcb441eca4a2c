#include "cotandet/cli.hpp"

int main(int argc, char** argv) { return cotandet::cli::run(argc, argv); }
