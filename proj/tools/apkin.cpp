#include "apkin/cli.hpp"

int main(int argc, char** argv) { return apkin::run_cli(argc, argv); }
