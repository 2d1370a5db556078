#include "scenforge/cli.hpp"

int main(int argc, char** argv) { return scenforge::run_cli(argc, argv); }
