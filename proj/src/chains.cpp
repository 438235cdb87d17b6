#include "harmonic/chains.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "harmonic/numerics.hpp"

namespace harmonic {

ChainStore::ChainStore(int ndim) : ndim_(ndim) {
  if (ndim < 1) throw std::invalid_argument("ChainStore: ndim must be positive");
}

void ChainStore::add_chain(Eigen::MatrixXd samples, Eigen::VectorXd ln_posterior) {
  if (samples.cols() != ndim_) {
    throw std::invalid_argument("ChainStore: sample dimension " + std::to_string(samples.cols()) +
                                " does not match store dimension " + std::to_string(ndim_));
  }
  if (samples.rows() != ln_posterior.size()) {
    throw std::invalid_argument("ChainStore: sample count does not match ln_posterior length");
  }
  if (samples.rows() == 0) throw std::invalid_argument("ChainStore: empty chain");
  if (!samples.allFinite() || !ln_posterior.allFinite()) {
    throw std::invalid_argument("ChainStore: non-finite sample or ln_posterior value");
  }
  chains_.push_back(Chain{std::move(samples), std::move(ln_posterior)});
}

std::size_t ChainStore::nsamples() const {
  std::size_t n = 0;
  for (const auto& c : chains_) n += static_cast<std::size_t>(c.size());
  return n;
}

Eigen::MatrixXd ChainStore::stacked_samples() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nsamples()), ndim_);
  Eigen::Index row = 0;
  for (const auto& c : chains_) {
    out.middleRows(row, c.size()) = c.samples;
    row += c.size();
  }
  return out;
}

Eigen::VectorXd ChainStore::stacked_ln_posterior() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(nsamples()));
  Eigen::Index row = 0;
  for (const auto& c : chains_) {
    out.segment(row, c.size()) = c.ln_posterior;
    row += c.size();
  }
  return out;
}

ChainStore ChainStore::subset(std::span<const std::size_t> indices) const {
  ChainStore out(ndim_);
  out.chains_.reserve(indices.size());
  for (std::size_t j : indices) out.chains_.push_back(chains_.at(j));
  return out;
}

ChainStore add_chains(ChainStore store, const std::vector<Eigen::MatrixXd>& samples,
                      const Eigen::MatrixXd& ln_posterior) {
  if (static_cast<Eigen::Index>(samples.size()) != ln_posterior.rows()) {
    throw std::invalid_argument("add_chains: chain count mismatch between samples and ln_posterior");
  }
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].rows() != ln_posterior.cols()) {
      throw std::invalid_argument("add_chains: samples per chain mismatch in chain " +
                                  std::to_string(j));
    }
  }
  // Validate everything before mutating so a failure leaves no partial chains.
  ChainStore staged(store.ndim());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    staged.add_chain(samples[j], ln_posterior.row(static_cast<Eigen::Index>(j)).transpose());
  }
  for (const auto& c : staged.chains()) store.add_chain(c.samples, c.ln_posterior);
  return store;
}

SplitResult split_by_chain(const ChainStore& store, double training_proportion,
                           std::uint64_t seed) {
  if (!(training_proportion > 0.0 && training_proportion < 1.0)) {
    throw std::invalid_argument("split_by_chain: training proportion must lie in (0, 1)");
  }
  const std::size_t nchains = store.nchains();
  if (nchains < 2) throw std::invalid_argument("split_by_chain: need at least two chains");

  std::vector<std::size_t> perm(nchains);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = nchains - 1; i > 0; --i) {
    std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
  }

  auto ntrain = static_cast<std::size_t>(std::llround(training_proportion * nchains));
  ntrain = std::clamp<std::size_t>(ntrain, 1, nchains - 1);

  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(ntrain));
  std::vector<std::size_t> infer(perm.begin() + static_cast<std::ptrdiff_t>(ntrain), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(infer.begin(), infer.end());

  return SplitResult{store.subset(train), store.subset(infer), training_proportion,
                     std::move(train), std::move(infer)};
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

nlohmann::json finite_or_null(double value) {
  return std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
}

double number_or(const nlohmann::json& j, double missing) {
  return j.is_null() ? missing : j.get<double>();
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  // from_chars does not accept a leading '+'.
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::invalid_argument("chains csv: non-numeric field '" + std::string(field) +
                                "' on line " + std::to_string(line));
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_chains_csv(const ChainStore& store, std::ostream& out) {
  out << "chain_id,sample_index";
  for (int k = 0; k < store.ndim(); ++k) out << ",theta_" << k;
  out << ",ln_posterior\n";
  for (std::size_t j = 0; j < store.nchains(); ++j) {
    const Chain& c = store.chain(j);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      out << j << ',' << i;
      for (int k = 0; k < store.ndim(); ++k) out << ',' << format_double(c.samples(i, k));
      out << ',' << format_double(c.ln_posterior(i)) << '\n';
    }
  }
}

ChainStore read_chains_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("chains csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "chain_id" || header[1] != "sample_index" ||
      header.back() != "ln_posterior") {
    throw std::invalid_argument("chains csv: unexpected header");
  }
  const int ndim = static_cast<int>(header.size()) - 3;

  std::vector<std::vector<double>> rows_by_chain;
  std::vector<std::vector<double>> lnp_by_chain;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("chains csv: wrong field count on line " + std::to_string(line_no));
    }
    const double chain_id = parse_double(fields[0], line_no);
    const double sample_index = parse_double(fields[1], line_no);
    if (chain_id < 0 || chain_id != std::floor(chain_id)) {
      throw std::invalid_argument("chains csv: bad chain_id on line " + std::to_string(line_no));
    }
    const auto j = static_cast<std::size_t>(chain_id);
    if (j >= rows_by_chain.size()) {
      rows_by_chain.resize(j + 1);
      lnp_by_chain.resize(j + 1);
    }
    if (sample_index != static_cast<double>(lnp_by_chain[j].size())) {
      throw std::invalid_argument("chains csv: samples out of order on line " +
                                  std::to_string(line_no));
    }
    for (int k = 0; k < ndim; ++k) rows_by_chain[j].push_back(parse_double(fields[2 + k], line_no));
    lnp_by_chain[j].push_back(parse_double(fields.back(), line_no));
  }

  ChainStore store(ndim);
  for (std::size_t j = 0; j < rows_by_chain.size(); ++j) {
    const auto n = static_cast<Eigen::Index>(lnp_by_chain[j].size());
    if (n == 0) throw std::invalid_argument("chains csv: chain ids are not contiguous");
    Eigen::MatrixXd samples =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            rows_by_chain[j].data(), n, ndim);
    Eigen::VectorXd lnp = Eigen::Map<const Eigen::VectorXd>(lnp_by_chain[j].data(), n);
    store.add_chain(std::move(samples), std::move(lnp));
  }
  return store;
}

nlohmann::json chains_to_json(const ChainStore& store) {
  nlohmann::json chains = nlohmann::json::array();
  for (const auto& c : store.chains()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(c.samples.cols()));
      for (Eigen::Index k = 0; k < c.samples.cols(); ++k) row[static_cast<std::size_t>(k)] = c.samples(i, k);
      rows.push_back(std::move(row));
    }
    std::vector<double> lnp(c.ln_posterior.data(), c.ln_posterior.data() + c.ln_posterior.size());
    chains.push_back({{"samples", std::move(rows)}, {"ln_posterior", std::move(lnp)}});
  }
  return {{"ndim", store.ndim()}, {"chains", std::move(chains)}};
}

ChainStore chains_from_json(const nlohmann::json& j) {
  ChainStore store(j.at("ndim").get<int>());
  for (const auto& c : j.at("chains")) {
    const auto& rows = c.at("samples");
    const auto lnp = c.at("ln_posterior").get<std::vector<double>>();
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()), store.ndim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (static_cast<int>(row.size()) != store.ndim()) {
        throw std::invalid_argument("chains json: sample row has wrong dimension");
      }
      for (int k = 0; k < store.ndim(); ++k) samples(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
    }
    store.add_chain(std::move(samples),
                    Eigen::Map<const Eigen::VectorXd>(lnp.data(), static_cast<Eigen::Index>(lnp.size())));
  }
  return store;
}

}  // namespace harmonic
