// Fill the coefficient cache with the tables the heavier tests read.
#include <chrono>
#include <cstdio>
#include <exception>

#include "qtwist/newform.hpp"

int main() {
  if (!qtwist::default_cache_dir()) {
    std::fprintf(stderr, "QTWIST_CACHE_DIR is not set\n");
    return 1;
  }
  struct Need {
    const char* label;
    unsigned long long limit;
  };
  const Need needs[] = {{"37a1", 1000000}, {"43a1", 100000}, {"53a1", 100000}, {"11a1", 100000},
                        {"32a2", 100000}, {"389a1", 100000}};
  try {
    for (const auto& n : needs) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto f = qtwist::catalog_form(n.label, n.limit);
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("%s: %zu primes up to %llu (%.1f s)\n", n.label, f.primes().size(), n.limit, s);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
