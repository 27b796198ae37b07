#include "admmdet/cli.hpp"

int main(int argc, char** argv) { return admmdet::cli::run(argc, argv); }
