#ifndef GRADBALANCE_KERNELS_HPP_
#define GRADBALANCE_KERNELS_HPP_

#include <cstddef>

namespace gradbalance::kernels {

// Data-parallel inner loops used by the model and the combiners. The
// default entry points parallelize with OpenMP above a size cutoff;
// kernels::serial holds the plain reference loops the tests and the
// benchmark compare against.
//
// Reductions use a fixed chunk width so the summation order depends only
// on the input length, never on the thread count: results are bit-identical
// whether a kernel runs on 1 thread or 16.

inline constexpr std::size_t kReductionChunk = 4096;
// below this many multiply-adds a parallel region is not worth spawning
inline constexpr std::size_t kParallelCutoff = 1u << 21;

namespace serial {

double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);

// Z(n x out) = X(n x in) * W(out x in)^T, then Z[s] += b
void linear_forward(const double* x, const double* w, const double* b,
                    double* z, std::size_t n, std::size_t in,
                    std::size_t out);
// dW(out x in) = delta(n x out)^T * X(n x in); db(out) = column sums of delta
void weight_grad(const double* delta, const double* x, double* dw, double* db,
                 std::size_t n, std::size_t in, std::size_t out);
// dX(n x in) = delta(n x out) * W(out x in)
void input_grad(const double* delta, const double* w, double* dx,
                std::size_t n, std::size_t in, std::size_t out);

}  // namespace serial

double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double nrm2(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void linear_forward(const double* x, const double* w, const double* b,
                    double* z, std::size_t n, std::size_t in, std::size_t out);
void weight_grad(const double* delta, const double* x, double* dw, double* db,
                 std::size_t n, std::size_t in, std::size_t out);
void input_grad(const double* delta, const double* w, double* dx,
                std::size_t n, std::size_t in, std::size_t out);

}  // namespace gradbalance::kernels

#endif  // GRADBALANCE_KERNELS_HPP_
