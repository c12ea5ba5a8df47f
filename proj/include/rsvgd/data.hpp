#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/report.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// Dense design matrix with binary labels in {0, 1}.
struct Dataset {
  Matrix X;
  Vector y;
};

namespace detail {

inline double parse_double(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw format_error(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses sparse "label idx:val idx:val ..." lines with 1-based, strictly
/// increasing indices. Labels −1/+1 are mapped to 0/1. Blank lines are skipped.
inline Dataset load_sparse_dataset(std::istream& in) {
  struct Entry {
    std::size_t col;
    double value;
  };
  std::vector<std::vector<Entry>> rows;
  std::vector<double> labels;
  std::size_t width = 0;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream tokens(text);
    std::string tok;
    if (!(tokens >> tok)) continue;

    const double raw = detail::parse_double(tok, line, "label");
    double label;
    if (raw == 1.0) {
      label = 1.0;
    } else if (raw == 0.0 || raw == -1.0) {
      label = 0.0;
    } else {
      throw format_error(line, "label must be 0, 1, -1 or +1");
    }

    std::vector<Entry> row;
    std::size_t prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw format_error(line, "malformed feature '" + tok + "'");
      }
      std::size_t idx = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (res.ec != std::errc() || res.ptr != tok.data() + colon) {
        throw format_error(line, "malformed index in '" + tok + "'");
      }
      if (idx == 0) throw format_error(line, "feature indices are 1-based");
      if (idx <= prev) throw format_error(line, "feature indices must be strictly increasing");
      prev = idx;
      row.push_back({idx, detail::parse_double(std::string_view(tok).substr(colon + 1), line, "value")});
      width = std::max(width, idx);
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  Dataset data{Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width)),
               Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    data.y(static_cast<Eigen::Index>(r)) = labels[r];
    for (const auto& e : rows[r]) data.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e.col - 1)) = e.value;
  }
  return data;
}

inline Dataset load_sparse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open dataset '" + path + "'");
  return load_sparse_dataset(in);
}

/// Writes nonzero entries in the sparse format with round-trip precision.
inline void write_sparse_dataset(std::ostream& out, const Dataset& data) {
  for (Eigen::Index r = 0; r < data.X.rows(); ++r) {
    out << (data.y(r) == 1.0 ? "1" : "0");
    for (Eigen::Index c = 0; c < data.X.cols(); ++c) {
      if (data.X(r, c) != 0.0) out << ' ' << (c + 1) << ':' << format_number(data.X(r, c));
    }
    out << '\n';
  }
}

struct Split {
  Dataset train;
  Dataset test;
  Vector mean;   ///< per-feature shift applied (0 when not standardized)
  Vector scale;  ///< per-feature divisor applied (1 when not standardized)
};

/// Seeded shuffle, the first ⌈split·D⌉ rows for training. When `standardize`
/// is set, features are centered and scaled with training-set statistics
/// (population standard deviation); constant features are left untouched.
inline Split split_standardize(const Dataset& data, double split, std::uint64_t seed, bool standardize) {
  if (!(split > 0.0 && split < 1.0)) throw precondition_error("split_standardize: split must lie in (0, 1)");
  const auto D = static_cast<std::size_t>(data.X.rows());
  if (D < 2) throw precondition_error("split_standardize: need at least two rows");
  const auto n_train = static_cast<std::size_t>(std::ceil(split * static_cast<double>(D) - 1e-9));
  if (n_train == 0 || n_train >= D) throw precondition_error("split_standardize: split leaves an empty partition");

  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto m = data.X.cols();
  Split s;
  s.train = {Matrix(static_cast<Eigen::Index>(n_train), m), Vector(static_cast<Eigen::Index>(n_train))};
  s.test = {Matrix(static_cast<Eigen::Index>(D - n_train), m), Vector(static_cast<Eigen::Index>(D - n_train))};
  for (std::size_t i = 0; i < D; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    Dataset& dst = i < n_train ? s.train : s.test;
    const auto row = static_cast<Eigen::Index>(i < n_train ? i : i - n_train);
    dst.X.row(row) = data.X.row(src);
    dst.y(row) = data.y(src);
  }

  s.mean = Vector::Zero(m);
  s.scale = Vector::Ones(m);
  if (standardize) {
    const double nt = static_cast<double>(n_train);
    for (Eigen::Index c = 0; c < m; ++c) {
      const double mu = s.train.X.col(c).sum() / nt;
      const double sd = std::sqrt((s.train.X.col(c).array() - mu).square().sum() / nt);
      if (sd > 1e-12) {
        s.mean(c) = mu;
        s.scale(c) = sd;
      }
    }
    for (Dataset* part : {&s.train, &s.test}) {
      part->X = ((part->X.rowwise() - s.mean.transpose()).array().rowwise() / s.scale.transpose().array()).matrix();
    }
  }
  return s;
}

struct SyntheticData {
  Dataset data;
  Vector true_w;
};

/// x ~ N(0, I), w ~ N(0, I). Separable labels are 1{wᵀx ≥ 0}; otherwise
/// labels are drawn from Bern(s(wᵀx)).
inline SyntheticData make_synthetic_blr(std::size_t rows, std::size_t features, std::uint64_t seed, bool separable) {
  if (rows < 1 || features < 1) throw precondition_error("make_synthetic_blr: need rows >= 1 and features >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SyntheticData s;
  s.true_w.resize(static_cast<Eigen::Index>(features));
  for (auto& v : s.true_w) v = normal(rng);
  s.data.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(features));
  s.data.y.resize(static_cast<Eigen::Index>(rows));
  for (Eigen::Index r = 0; r < s.data.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.data.X.cols(); ++c) s.data.X(r, c) = normal(rng);
    const double z = s.data.X.row(r).dot(s.true_w);
    if (separable) {
      s.data.y(r) = z >= 0.0 ? 1.0 : 0.0;
    } else {
      s.data.y(r) = unif(rng) < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
    }
  }
  return s;
}

}  // namespace rsvgd
