#include "assist/cli.hpp"

int main(int argc, char** argv) { return assist::run_cli(argc, argv); }
