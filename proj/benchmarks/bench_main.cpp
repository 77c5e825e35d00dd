#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/charsum.hpp"
#include "qtwist/curve.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/explicit_formula.hpp"
#include "qtwist/family.hpp"
#include "qtwist/gauss_sum.hpp"
#include "qtwist/lvalue.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/proxy.hpp"

using namespace qtwist;

namespace {

// Built lazily so the point-counting benchmarks do not pay for it.
const Newform& form37(u64 limit) {
  static const Newform f = catalog_form("37a1", 200000);
  if (limit > f.prime_limit()) throw MissingCoefficient(limit, f.prime_limit());
  return f;
}

void BM_kronecker(benchmark::State& st) {
  i64 d = -4003;
  u64 n = 1;
  int acc = 0;
  for (auto _ : st) {
    acc += kronecker(d, n);
    n += 2;
    if (n > 1000000) n = 1;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_kronecker);

void BM_point_count(benchmark::State& st) {
  const auto e = catalog_curve("37a1");
  const u64 p = static_cast<u64>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ap_point_count(*e, p));
}
BENCHMARK(BM_point_count)->Arg(1009)->Arg(100003)->Arg(999983);

void BM_gauss_closed(benchmark::State& st) {
  i64 m = 1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(gauss_closed(m, 1575));
    m = m % 50 + 1;
  }
}
BENCHMARK(BM_gauss_closed);

void BM_dirichlet_poly(benchmark::State& st) {
  const double x = static_cast<double>(st.range(0));
  const DirichletPoly P(form37(static_cast<u64>(x)), x, 296);
  i64 d = 1000001;
  for (auto _ : st) {
    benchmark::DoNotOptimize(P(d));
    d += 4;
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_dirichlet_poly)->Arg(1000)->Arg(100000);

void BM_zero_sum(benchmark::State& st) {
  const double X = static_cast<double>(st.range(0));
  const ZeroSumEngine e({&form37(static_cast<u64>(X))}, fejer_kernel(std::log(X)));
  const auto ds = TwistFamily::all_classes({FormSignature::of(form37(1000))}, -1).enumerate(0, 20000);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(e.zero_sum(ds[i]));
    i = (i + 1) % ds.size();
  }
}
BENCHMARK(BM_zero_sum)->Arg(10000)->Arg(100000);

void BM_char_sum(benchmark::State& st) {
  const auto fam = TwistFamily::all_classes({}, 1);
  for (auto _ : st) benchmark::DoNotOptimize(char_sum(9, 1, fam, static_cast<double>(st.range(0))));
}
BENCHMARK(BM_char_sum)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_central_derivative(benchmark::State& st) {
  const i64 d = st.range(0);
  const CoefficientTable table(form37(1000), required_table_size(37, d));
  for (auto _ : st) {
    const TwistedL L(table, d);
    benchmark::DoNotOptimize(L.central_derivative().lprime);
  }
}
BENCHMARK(BM_central_derivative)->Arg(-15)->Arg(-1155)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
