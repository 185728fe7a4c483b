#include "asyncpr_cli/app.hpp"

int main(int argc, char** argv) { return asyncpr::cli::run_cli(argc, argv); }
