#include "kinehier/cli/commands.hpp"

int main(int argc, char** argv) { return kinehier::cli::run(argc, argv); }
