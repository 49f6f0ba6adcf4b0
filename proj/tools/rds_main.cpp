#include "rds/cli.hpp"

int main(int argc, char** argv) { return rds::cli_main(argc, argv); }
