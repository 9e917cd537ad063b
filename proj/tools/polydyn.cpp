// CLI front end. Subcommands are wired up as the library grows.
#include <cstdio>

int main() {
  std::puts("polydyn: subcommands not wired yet");
  return 1;
}
