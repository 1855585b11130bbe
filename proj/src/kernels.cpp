#include "gradbalance/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gradbalance::kernels {

namespace serial {

// Eight independent accumulator lanes, combined in a fixed order: the
// compiler can vectorize the streams and hide add latency while the result
// stays identical from run to run and thread count to thread count.
double dot(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
    acc[4] += a[i + 4] * b[i + 4];
    acc[5] += a[i + 5] * b[i + 5];
    acc[6] += a[i + 6] * b[i + 6];
    acc[7] += a[i + 7] * b[i + 7];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((acc[0] + acc[1]) + (acc[2] + acc[3])) +
          ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
         tail;
}

double nrm2sq(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

// The blocked loops below process four rows per pass so each output row is
// loaded and stored once per block instead of once per row. Accumulation
// order per output element is unchanged: results match the naive nest
// exactly because every dw[i] (or dx[i], z[o]) still sums its terms in
// sample order with individually rounded multiply-adds.

void linear_forward(const double* x, const double* w, const double* b,
                    double* z, std::size_t n, std::size_t in,
                    std::size_t out) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * in;
    double* zs = z + s * out;
    for (std::size_t o = 0; o < out; ++o) {
      zs[o] = b[o] + dot(xs, w + o * in, in);
    }
  }
}

void weight_grad(const double* delta, const double* x, double* dw, double* db,
                 std::size_t n, std::size_t in, std::size_t out) {
  std::memset(dw, 0, sizeof(double) * in * out);
  std::memset(db, 0, sizeof(double) * out);
  for (std::size_t o = 0; o < out; ++o) {
    double* dwo = dw + o * in;
    double acc = 0.0;
    std::size_t s = 0;
    for (; s + 4 <= n; s += 4) {
      const double d0 = delta[s * out + o];
      const double d1 = delta[(s + 1) * out + o];
      const double d2 = delta[(s + 2) * out + o];
      const double d3 = delta[(s + 3) * out + o];
      const double* x0 = x + s * in;
      const double* x1 = x0 + in;
      const double* x2 = x1 + in;
      const double* x3 = x2 + in;
      for (std::size_t i = 0; i < in; ++i) {
        dwo[i] = dwo[i] + d0 * x0[i] + d1 * x1[i] + d2 * x2[i] + d3 * x3[i];
      }
      acc += d0 + d1 + d2 + d3;
    }
    for (; s < n; ++s) {
      const double d = delta[s * out + o];
      axpy(d, x + s * in, dwo, in);
      acc += d;
    }
    db[o] = acc;
  }
}

void input_grad(const double* delta, const double* w, double* dx,
                std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* ds = delta + s * out;
    double* dxs = dx + s * in;
    std::memset(dxs, 0, sizeof(double) * in);
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
      const double d0 = ds[o];
      const double d1 = ds[o + 1];
      const double d2 = ds[o + 2];
      const double d3 = ds[o + 3];
      const double* w0 = w + o * in;
      const double* w1 = w0 + in;
      const double* w2 = w1 + in;
      const double* w3 = w2 + in;
      for (std::size_t i = 0; i < in; ++i) {
        dxs[i] = dxs[i] + d0 * w0[i] + d1 * w1[i] + d2 * w2[i] + d3 * w3[i];
      }
    }
    for (; o < out; ++o) {
      axpy(ds[o], w + o * in, dxs, in);
    }
  }
}

}  // namespace serial

// Work below the cutoff never enters an OpenMP region; a 2-thread team is
// pure overhead for the sub-millisecond shapes the training loop hits.
// Above it, rows are partitioned across threads and every output element is
// still produced whole by one thread with the serial inner loops, so the
// arithmetic is identical for any team size.

// Chunked reduction: fixed-width partials summed in chunk order, so dot()
// is bitwise independent of the thread count.
double dot(const double* a, const double* b, std::size_t n) {
  if (n <= kReductionChunk) return serial::dot(a, b, n);
  const std::size_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(nchunks);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t hi = lo + kReductionChunk < n ? lo + kReductionChunk : n;
    partial[static_cast<std::size_t>(c)] = serial::dot(a + lo, b + lo, hi - lo);
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

double nrm2sq(const double* a, std::size_t n) { return dot(a, a, n); }

double nrm2(const double* a, std::size_t n) { return std::sqrt(nrm2sq(a, n)); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  if (n <= kParallelCutoff) {
    serial::axpy(alpha, x, y, n);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    y[i] += alpha * x[i];
  }
}

void scal(double alpha, double* x, std::size_t n) {
  if (n <= kParallelCutoff) {
    serial::scal(alpha, x, n);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    x[i] *= alpha;
  }
}

void linear_forward(const double* x, const double* w, const double* b,
                    double* z, std::size_t n, std::size_t in,
                    std::size_t out) {
  if (n * in * out <= kParallelCutoff) {
    serial::linear_forward(x, w, b, z, n, in, out);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long s = 0; s < static_cast<long long>(n); ++s) {
    const double* xs = x + s * in;
    double* zs = z + s * out;
    for (std::size_t o = 0; o < out; ++o) {
      zs[o] = b[o] + serial::dot(xs, w + o * in, in);
    }
  }
}

void weight_grad(const double* delta, const double* x, double* dw, double* db,
                 std::size_t n, std::size_t in, std::size_t out) {
  if (n * in * out <= kParallelCutoff) {
    serial::weight_grad(delta, x, dw, db, n, in, out);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long o = 0; o < static_cast<long long>(out); ++o) {
    double* dwo = dw + o * in;
    std::memset(dwo, 0, sizeof(double) * in);
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double d = delta[s * out + o];
      serial::axpy(d, x + s * in, dwo, in);
      acc += d;
    }
    db[o] = acc;
  }
}

void input_grad(const double* delta, const double* w, double* dx,
                std::size_t n, std::size_t in, std::size_t out) {
  if (n * in * out <= kParallelCutoff) {
    serial::input_grad(delta, w, dx, n, in, out);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long s = 0; s < static_cast<long long>(n); ++s) {
    const double* ds = delta + s * out;
    double* dxs = dx + s * in;
    std::memset(dxs, 0, sizeof(double) * in);
    for (std::size_t o = 0; o < out; ++o) {
      serial::axpy(ds[o], w + o * in, dxs, in);
    }
  }
}

}  // namespace gradbalance::kernels
