#include "hessianlab/cli.hpp"

int main(int argc, char** argv) { return hessianlab::cli::run(argc, argv); }
