#include "cli.hpp"

int main(int argc, char** argv) { return mtc::cli::dispatch(argc, argv); }
