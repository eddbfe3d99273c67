#include <cstdio>

int main() {
  std::puts("aqsim: placeholder");
  return 0;
}
