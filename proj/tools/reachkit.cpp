#include "reachkit/cli.hpp"

int main(int argc, char** argv) { return reachkit::run_cli(argc, argv); }
