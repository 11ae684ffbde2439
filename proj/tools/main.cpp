#include "cli.hpp"

int main(int argc, char** argv) { return cotkit::run_cli(argc, argv); }
