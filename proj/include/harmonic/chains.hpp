#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace harmonic {

/// One chain of posterior samples: an N x d sample matrix and the
/// unnormalised ln[L(theta) pi(theta)] at each row.
struct Chain {
  Eigen::MatrixXd samples;
  Eigen::VectorXd ln_posterior;

  Eigen::Index size() const { return samples.rows(); }
};

/// Posterior samples grouped by chain. Chains may be ragged but share ndim.
/// All entries are finite; every mutation validates its input.
class ChainStore {
 public:
  explicit ChainStore(int ndim);

  /// Appends one chain. Throws std::invalid_argument on shape mismatch,
  /// an empty chain or any non-finite value.
  void add_chain(Eigen::MatrixXd samples, Eigen::VectorXd ln_posterior);

  int ndim() const { return ndim_; }
  std::size_t nchains() const { return chains_.size(); }
  std::size_t nsamples() const;
  const Chain& chain(std::size_t j) const { return chains_.at(j); }
  const std::vector<Chain>& chains() const { return chains_; }

  /// All samples stacked chain by chain.
  Eigen::MatrixXd stacked_samples() const;
  Eigen::VectorXd stacked_ln_posterior() const;

  /// New store holding the listed chains, in the order given.
  ChainStore subset(std::span<const std::size_t> indices) const;

 private:
  int ndim_;
  std::vector<Chain> chains_;
};

/// Appends C chains of N samples. `samples` holds C matrices of N x d and
/// `ln_posterior` is C x N.
ChainStore add_chains(ChainStore store, const std::vector<Eigen::MatrixXd>& samples,
                      const Eigen::MatrixXd& ln_posterior);

struct SplitResult {
  ChainStore training;
  ChainStore inference;
  double training_proportion;
  std::vector<std::size_t> training_indices;   // ascending, into the source store
  std::vector<std::size_t> inference_indices;  // ascending
};

/// Assigns whole chains to training / inference using a seeded Fisher-Yates
/// permutation (mt19937_64). Training receives round(p * C) chains, clamped
/// so each side gets at least one.
SplitResult split_by_chain(const ChainStore& store, double training_proportion,
                           std::uint64_t seed);

// CSV layout: chain_id,sample_index,theta_0..theta_{d-1},ln_posterior.
// Doubles are written in shortest round-trip form.
void write_chains_csv(const ChainStore& store, std::ostream& out);
ChainStore read_chains_csv(std::istream& in);

// JSON layout: {"ndim": d, "chains": [{"samples": [[..],..], "ln_posterior": [..]}, ..]}
nlohmann::json chains_to_json(const ChainStore& store);
ChainStore chains_from_json(const nlohmann::json& j);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// JSON number, or null for inf / nan (JSON has no encoding for them).
nlohmann::json finite_or_null(double value);
/// Inverse of finite_or_null; null reads back as `missing`.
double number_or(const nlohmann::json& j, double missing);

}  // namespace harmonic
