#include <udreorder/cli.hpp>

int main(int argc, char** argv) { return udreorder::run_cli(argc, argv); }
