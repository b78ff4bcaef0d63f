#include "crop/cli.hpp"

int main(int argc, char** argv) { return crop::run_cli(argc, argv); }
