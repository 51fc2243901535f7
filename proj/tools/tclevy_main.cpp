#include "tclevy/runner.hpp"

int main(int argc, char** argv) { return tclevy::run_cli(argc, argv); }
