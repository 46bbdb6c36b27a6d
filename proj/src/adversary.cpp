// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/adversary.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace rbc::adversary {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

template <typename Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

bool family_is_real(const states::StateFamily& f) {
  for (int theta = 0; theta < 2; ++theta)
    for (int x = 0; x < 2; ++x)
      if (f.psi[theta][x].imag().cwiseAbs().maxCoeff() > 1e-14) return false;
  return true;
}

template <typename Scalar>
Dense<Scalar> kron(const Dense<Scalar>& a, const Dense<Scalar>& b) {
  Dense<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Scalar>
Dense<Scalar> cast_2x2(const Eigen::Matrix2cd& m);

template <>
Dense<double> cast_2x2<double>(const Eigen::Matrix2cd& m) {
  return m.real();
}
template <>
Dense<std::complex<double>> cast_2x2<std::complex<double>>(const Eigen::Matrix2cd& m) {
  return m;
}

// rho_{b,c} = (|psi_b^0><psi_b^0| + |psi_c^1><psi_c^1|) / 2
Eigen::Matrix2cd cross_mixture(const states::StateFamily& f, int b, int c) {
  return 0.5 * (f.psi[0][b] * f.psi[0][b].adjoint() + f.psi[1][c] * f.psi[1][c].adjoint());
}

int hamming_weight(std::uint64_t x) { return __builtin_popcountll(x); }

template <typename Scalar>
double relaxed_norm(const CrossGameInstance& inst) {
  const int n = static_cast<int>(inst.n);
  const std::int64_t dim = std::int64_t{1} << n;
  Eigen::Matrix2cd rho[2][2];
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c) rho[b][c] = cross_mixture(inst.family, b, c);

  const std::int64_t kmax = security::error_allowance(inst.delta, inst.n);
  Dense<Scalar> total = Dense<Scalar>::Zero(dim, dim);
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    if (hamming_weight(x) > kmax) continue;
    Dense<Scalar> term = Dense<Scalar>::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
      const int xk = (x >> k) & 1;
      term = kron(term, cast_2x2<Scalar>(rho[xk ^ inst.y[k]][xk ^ inst.z[k]]));
    }
    total += term;
  }
  Eigen::SelfAdjointEigenSolver<Dense<Scalar>> es(total, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

void check_instance(const CrossGameInstance& inst) {
  if (inst.n < 1 || inst.n > 8)
    throw std::invalid_argument("cross-game oracle limited to 1 <= n <= 8");
  if (inst.y.size() != static_cast<std::size_t>(inst.n) ||
      inst.z.size() != static_cast<std::size_t>(inst.n))
    throw std::invalid_argument("cross-game: |y| and |z| must equal n");
}

}  // namespace

double cross_game_norm_relaxed(const CrossGameInstance& inst) {
  check_instance(inst);
  return family_is_real(inst.family) ? relaxed_norm<double>(inst)
                                     : relaxed_norm<std::complex<double>>(inst);
}

double cross_game_norm_exact(const CrossGameInstance& inst) {
  check_instance(inst);
  const int n = static_cast<int>(inst.n);
  const std::int64_t dim = std::int64_t{1} << n;
  MatrixXcd total = MatrixXcd::Zero(dim, dim);
  for (std::uint64_t theta = 0; theta < (std::uint64_t{1} << n); ++theta) {
    // per-substring error allowances for this basis string
    int ns = 0;
    for (int k = 0; k < n; ++k) ns += ((theta >> k) & 1) == 0 ? 1 : 0;
    const std::int64_t allow_s = security::error_allowance(inst.delta, ns == 0 ? 1 : ns);
    const std::int64_t allow_t =
        security::error_allowance(inst.delta, (n - ns) == 0 ? 1 : (n - ns));
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      int err_s = 0, err_t = 0;
      for (int k = 0; k < n; ++k) {
        const int xk = (x >> k) & 1;
        if (((theta >> k) & 1) == 0)
          err_s += xk != inst.y[k] ? 1 : 0;
        else
          err_t += xk != inst.z[k] ? 1 : 0;
      }
      if (err_s > allow_s || err_t > allow_t) continue;
      Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
      for (int k = 0; k < n; ++k) {
        const int xk = (x >> k) & 1;
        const int tk = (theta >> k) & 1;
        Eigen::VectorXcd next(v.size() * 2);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          next(2 * i) = v(i) * inst.family.psi[tk][xk](0);
          next(2 * i + 1) = v(i) * inst.family.psi[tk][xk](1);
        }
        v = std::move(next);
      }
      total.noalias() += v * v.adjoint();
    }
  }
  total /= static_cast<double>(std::int64_t{1} << n);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(total, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool cheat_bound_check(std::int64_t n, double delta, const states::StateFamily& family) {
  const double bound = security::eps_exact(n, delta, states::lambda1_of(family));
  CrossGameInstance inst;
  inst.n = n;
  inst.delta = delta;
  inst.family = family;
  inst.y.assign(n, 0);
  inst.z.assign(n, 0);
  for (std::uint64_t y = 0; y < (std::uint64_t{1} << n); ++y) {
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z) {
      for (int k = 0; k < n; ++k) {
        inst.y[k] = (y >> k) & 1;
        inst.z[k] = (z >> k) & 1;
      }
      if (cross_game_norm_relaxed(inst) > bound + 1e-9) return false;
    }
  }
  return true;
}

double best_single_photon_guess(const states::StateFamily& family, std::int64_t n, double delta) {
  Eigen::Matrix2d table;
  for (int a = 0; a < 2; ++a) {
    const auto spec = states::diagonalize_mixture(family.psi[0][0], family.psi[1][a]);
    table(0, a) = spec.lambda_plus;
    table(1, a) = spec.lambda_minus;
  }
  return security::coin_guess_max(table, n, delta);
}

AttackOutcome simulate_multiphoton_attack(const security::ProtocolParams& params, Rng rng) {
  return simulate_attack(params, rng, CheatStrategy{});
}

AttackOutcome simulate_attack(const security::ProtocolParams& params, Rng rng,
                              const CheatStrategy& strategy) {
  params.validate();
  AttackOutcome out;
  const std::int64_t target = security::detection_threshold(params.gamma, params.n);

  // Intermediate measurement basis: the eigenbasis of the selected cross
  // pair; outcome "+" decodes as (b*, c*) for the (Z, X) questions, "-" as
  // the complements. Defaults to the maximal-overlap pair, whose per-round
  // correct-guess probability is lambda0.
  int bs = strategy.guess_pair_b, cs = strategy.guess_pair_c;
  if (bs < 0 || cs < 0) {
    double best = -1.0;
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const double lp =
            states::diagonalize_mixture(params.family.psi[0][b], params.family.psi[1][c])
                .lambda_plus;
        if (lp > best) {
          best = lp;
          bs = b;
          cs = c;
        }
      }
  }
  const auto spec = states::diagonalize_mixture(params.family.psi[0][bs], params.family.psi[1][cs]);

  Rng channel = rng.split(0);
  Rng alice = rng.split(1);
  Rng bob = rng.split(2);

  auto measure_single = [&](std::int64_t& declared) {
    ++out.n_single;
    ++declared;
    const int x = alice.bit();
    const int theta = alice.bit();
    const double p_plus = std::norm(spec.e_plus.dot(params.family.psi[theta][x]));
    const bool plus = bob.bernoulli(p_plus);
    if (theta == 0) {
      ++out.sifted_s;
      if ((plus ? bs : 1 - bs) != x) ++out.errors_s;
    } else {
      ++out.sifted_t;
      if ((plus ? cs : 1 - cs) != x) ++out.errors_t;
    }
  };

  std::int64_t declared = 0;
  if (strategy.kind == CheatKind::basis_guess) {
    // photon statistics are irrelevant: the first ceil(gamma n) rounds are
    // declared and measured one photon each in the intermediate basis
    for (std::int64_t k = 0; k < params.n && declared < target; ++k) measure_single(declared);
    out.n_single = 0;  // not "forced": every declared round is a guess
  } else {
    for (std::int64_t k = 0; k < params.n; ++k) {
      const long photons = channel.poisson(params.mu);  // eta = 1 for dishonest Bob
      if (photons >= 2 && out.n_multi < target) {
        ++out.n_multi;
        ++declared;
        const int theta = alice.bit();
        alice.bit();  // x irrelevant: split measurement answers both bases
        (theta == 0 ? out.sifted_s : out.sifted_t) += 1;
      }
    }
    if (strategy.kind == CheatKind::discard_singles) {
      // refusing to declare singles: below the quota the run simply aborts
      if (declared < target) {
        out.success = false;
        return out;
      }
    } else {
      while (declared < target) measure_single(declared);
    }
  }

  const double eps = 1e-9;
  out.success =
      static_cast<double>(out.errors_s) <= params.delta * static_cast<double>(out.sifted_s) + eps &&
      static_cast<double>(out.errors_t) <= params.delta * static_cast<double>(out.sifted_t) + eps;
  return out;
}

}  // namespace rbc::adversary
