#include "cli.hpp"

int main(int argc, char** argv) { return ocm3d::cli::Run(argc, argv); }
