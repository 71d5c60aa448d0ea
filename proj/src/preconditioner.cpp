#include "pipekrylov/preconditioner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pipekrylov {

namespace {

Vector inverse_diagonal(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw SetupError("jacobi: operator must be square");
  Vector d = A.diagonal_values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) throw SetupError("jacobi: zero diagonal entry in row " + std::to_string(i));
    d[i] = 1.0 / d[i];
  }
  return d;
}

Vector hadamard(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("preconditioner: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

class IdentityPc final : public Preconditioner {
 public:
  Vector apply(const Vector& r) override { return r; }
  bool is_linear() const override { return true; }
  std::string name() const override { return "identity"; }
  std::unique_ptr<Preconditioner> clone() const override { return std::make_unique<IdentityPc>(*this); }
};

class JacobiPc final : public Preconditioner {
 public:
  explicit JacobiPc(const SparseMatrix& A) : inv_diag_(inverse_diagonal(A)) {}
  Vector apply(const Vector& r) override { return hadamard(inv_diag_, r); }
  bool is_linear() const override { return true; }
  std::string name() const override { return "jacobi"; }
  std::unique_ptr<Preconditioner> clone() const override { return std::make_unique<JacobiPc>(*this); }

 private:
  Vector inv_diag_;
};

class BlockJacobiPc final : public Preconditioner {
 public:
  BlockJacobiPc(const SparseMatrix& A, std::size_t n_blocks, int inner_iters)
      : n_(A.rows()), inner_iters_(inner_iters) {
    if (A.rows() != A.cols()) throw SetupError("block_jacobi: operator must be square");
    if (n_blocks == 0 || n_blocks > n_) throw SetupError("block_jacobi: need 1 <= n_blocks <= n");
    if (inner_iters < 0) throw SetupError("block_jacobi: inner iterations must be >= 0");
    const std::size_t width = n_ / n_blocks;
    auto blocks = std::make_shared<std::vector<Block>>();
    for (std::size_t k = 0; k < n_blocks; ++k) {
      const std::size_t begin = k * width;
      const std::size_t end = k + 1 == n_blocks ? n_ : begin + width;
      SparseMatrix sub = A.principal_block(begin, end);
      Vector inv = inverse_diagonal(sub);
      blocks->push_back({begin, end, std::move(sub), std::move(inv)});
    }
    blocks_ = std::move(blocks);
  }

  Vector apply(const Vector& r) override {
    if (r.size() != n_) throw DimensionError("block_jacobi: length mismatch");
    Vector out(n_);
    for (const auto& blk : *blocks_) {
      Vector local(blk.end - blk.begin);
      for (std::size_t i = blk.begin; i < blk.end; ++i) local[i - blk.begin] = r[i];
      const Vector z = jacobi_pcg_fixed(blk.A, blk.inv_diag, local, inner_iters_);
      for (std::size_t i = blk.begin; i < blk.end; ++i) out[i] = z[i - blk.begin];
    }
    return out;
  }
  bool is_linear() const override { return false; }
  std::string name() const override { return "block_jacobi"; }
  std::unique_ptr<Preconditioner> clone() const override { return std::make_unique<BlockJacobiPc>(*this); }

 private:
  struct Block {
    std::size_t begin;
    std::size_t end;
    SparseMatrix A;
    Vector inv_diag;
  };
  std::size_t n_;
  int inner_iters_;
  std::shared_ptr<const std::vector<Block>> blocks_;
};

class NestedKrylovPc final : public Preconditioner {
 public:
  NestedKrylovPc(const SparseMatrix& A, int inner_iters)
      : A_(std::make_shared<const SparseMatrix>(A)),
        inv_diag_(inverse_diagonal(A)),
        inner_iters_(inner_iters) {
    if (inner_iters < 0) throw SetupError("nested_krylov: inner iterations must be >= 0");
  }
  Vector apply(const Vector& r) override { return jacobi_pcg_fixed(*A_, inv_diag_, r, inner_iters_); }
  bool is_linear() const override { return false; }
  std::string name() const override { return "nested_krylov"; }
  std::unique_ptr<Preconditioner> clone() const override { return std::make_unique<NestedKrylovPc>(*this); }

 private:
  std::shared_ptr<const SparseMatrix> A_;
  Vector inv_diag_;
  int inner_iters_;
};

class NoisyPc final : public Preconditioner {
 public:
  NoisyPc(double eta, std::uint64_t seed) : eta_(eta), gauss_(seed) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw SetupError("noisy: eta must be finite and >= 0");
  }
  Vector apply(const Vector& r) override {
    const Vector g = gauss_.unit_vector(r.size());
    return axpy(r, eta_ * norm2(r), g);
  }
  bool is_linear() const override { return false; }
  std::string name() const override { return "noisy"; }
  std::unique_ptr<Preconditioner> clone() const override { return std::make_unique<NoisyPc>(*this); }

 private:
  double eta_;
  GaussianSampler gauss_;
};

}  // namespace

Vector jacobi_pcg_fixed(const SparseMatrix& A, const Vector& inv_diag, const Vector& r, int iters) {
  Vector x(r.size());
  if (iters <= 0) return x;
  Vector res = r;
  Vector z = hadamard(inv_diag, res);
  Vector p = z;
  double gamma = dot(z, res);
  for (int k = 0; k < iters; ++k) {
    if (gamma == 0.0) break;
    const Vector s = apply(A, p);
    const double eta = dot(p, s);
    if (!(eta > 0.0)) break;
    const double alpha = gamma / eta;
    x.add_scaled(alpha, p);
    if (k + 1 == iters) break;
    res.add_scaled(-alpha, s);
    z = hadamard(inv_diag, res);
    const double gamma_new = dot(z, res);
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    p.scale(beta).add_scaled(1.0, z);
  }
  return x;
}

std::unique_ptr<Preconditioner> make_identity() { return std::make_unique<IdentityPc>(); }

std::unique_ptr<Preconditioner> make_jacobi(const SparseMatrix& A) { return std::make_unique<JacobiPc>(A); }

std::unique_ptr<Preconditioner> make_block_jacobi(const SparseMatrix& A, std::size_t n_blocks,
                                                  int inner_iters) {
  return std::make_unique<BlockJacobiPc>(A, n_blocks, inner_iters);
}

std::unique_ptr<Preconditioner> make_nested_krylov(const SparseMatrix& A, int inner_iters) {
  return std::make_unique<NestedKrylovPc>(A, inner_iters);
}

std::unique_ptr<Preconditioner> make_noisy(double eta, std::uint64_t seed) {
  return std::make_unique<NoisyPc>(eta, seed);
}

std::unique_ptr<Preconditioner> make_preconditioner(PcKind kind, const SparseMatrix& A, double eta,
                                                    std::uint64_t seed, std::size_t n_blocks,
                                                    int inner_iters) {
  switch (kind) {
    case PcKind::identity: return make_identity();
    case PcKind::jacobi: return make_jacobi(A);
    case PcKind::block_jacobi: return make_block_jacobi(A, n_blocks, inner_iters);
    case PcKind::nested_krylov: return make_nested_krylov(A, inner_iters);
    case PcKind::noisy: return make_noisy(eta, seed);
  }
  throw SetupError("unknown preconditioner kind");
}

FaithfulnessEstimate probe_faithfulness(Preconditioner& B, const SparseMatrix& A, int n_samples,
                                        std::uint64_t seed) {
  if (n_samples < 1) throw ParameterError("probe_faithfulness: n_samples must be >= 1");
  if (A.rows() != A.cols()) throw DimensionError("probe_faithfulness: operator must be square");
  GaussianSampler gauss(seed);
  FaithfulnessEstimate est;
  est.samples = n_samples;
  est.ratios.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    const Vector v = gauss.unit_vector(A.cols());
    const Vector bav = B.apply(apply(A, v));
    est.ratios.push_back(norm2(axpy(bav, -1.0, v)) / norm2(v));
  }
  est.c_hat = *std::max_element(est.ratios.begin(), est.ratios.end());
  return est;
}

}  // namespace pipekrylov
