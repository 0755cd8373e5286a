#include "quickflex/io.hpp"

int main(int argc, char** argv) { return quickflex::run_main(argc, argv); }
