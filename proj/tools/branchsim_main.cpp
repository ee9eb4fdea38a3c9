#include <cstdio>

int main() {
  std::puts("branchsim: subcommands pending");
  return 0;
}
