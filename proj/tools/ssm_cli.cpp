#include <cstdio>

int main() {
  std::puts("ssm: command-line surface not wired yet");
  return 1;
}
