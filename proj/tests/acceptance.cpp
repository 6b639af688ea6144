// Acceptance suite: one pass/fail line per criterion. Populated alongside the
// modules it exercises.
#include <cstdio>

int main() {
  std::puts("acceptance suite not wired yet");
  return 1;
}
