#include <cstdio>

#include "scarscope/version.hpp"

int main() {
  std::puts(SCARSCOPE_VERSION);
  return 0;
}
