#include "semaug/cli.hpp"

int main(int argc, char** argv) { return semaug::run_cli(argc, argv); }
