#include <iostream>

#include "dualize/catalog.hpp"

int main() {
    std::cout << "dualize (work in progress)\n";
    return 0;
}
