#include <cstdio>

int main() {
  std::puts("tsynth: command-line surface not wired up yet");
  return 2;
}
