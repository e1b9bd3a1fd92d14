#include "mlnk/cli.hpp"

int main(int argc, char** argv) { return mlnk::run_cli(argc, argv); }
