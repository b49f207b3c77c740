#include "skalg/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return skalg::app::run(argc, argv, std::cout, std::cerr); }
