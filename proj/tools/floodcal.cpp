#include <iostream>

int main() {
    std::cout << "floodcal (wiring in progress)\n";
    return 0;
}
