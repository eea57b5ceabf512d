#include <iostream>

int main() {
  std::cerr << "edsym: command-line interface not wired yet\n";
  return 2;
}
