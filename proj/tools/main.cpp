#include "delayq/cli.hpp"

int main(int argc, char** argv) { return delayq::cli::run(argc, argv); }
