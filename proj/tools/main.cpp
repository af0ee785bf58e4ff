#include "cli_app.hpp"

int main(int argc, char** argv) { return mg1fp::cli::run(argc, argv); }
