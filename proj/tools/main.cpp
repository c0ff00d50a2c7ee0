#include "cli_app.hpp"

int main(int argc, char** argv) { return bomber::cli::run(argc, argv); }
