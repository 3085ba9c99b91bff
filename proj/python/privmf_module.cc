// Copyright 2026 The privmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <tuple>
#include <vector>

#include "privmf/evaluation.h"
#include "privmf/inference.h"
#include "privmf/protocol.h"
#include "privmf/rng.h"
#include "privmf/selection.h"

namespace py = pybind11;

namespace privmf {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Label ToLabel(int x0) {
  auto label = LabelFromInt(x0);
  if (!label) throw py::value_error("x0 must be -1 or 1");
  return *label;
}

// Items 0..M-1 from a bias vector and an M x d latent matrix.
Catalog MakeCatalog(const Eigen::VectorXd& biases, const RowMatrix& latents) {
  if (biases.size() != latents.rows()) {
    throw py::value_error("biases and latents disagree on the item count");
  }
  std::vector<ExtendedItemProfile> profiles;
  for (Eigen::Index j = 0; j < latents.rows(); ++j) {
    profiles.push_back({j, biases(j), latents.row(j).transpose()});
  }
  return Catalog(std::move(profiles));
}

Disclosure MakeDisclosure(const std::vector<ItemId>& ids,
                          const Eigen::VectorXd& biases,
                          const std::optional<Eigen::VectorXd>& ratios) {
  if (static_cast<Eigen::Index>(ids.size()) != biases.size() ||
      (ratios && ratios->size() != biases.size())) {
    throw py::value_error("ids, biases and ratios must have equal length");
  }
  Disclosure d;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    DisclosedItem item{ids[k], biases(static_cast<Eigen::Index>(k)), {}};
    if (ratios) item.ratio = (*ratios)(static_cast<Eigen::Index>(k));
    d.items.push_back(item);
  }
  return d;
}

std::vector<Label> ToLabels(const std::vector<int>& labels) {
  std::vector<Label> out;
  for (int l : labels) out.push_back(ToLabel(l));
  return out;
}

py::dict GenerateSyntheticPy(int n_users, int n_items, int d,
                             double noise_sigma, double bias_scale,
                             std::uint64_t seed) {
  SyntheticConfig config;
  config.n_users = n_users;
  config.n_items = n_items;
  config.d = d;
  config.noise_sigma = noise_sigma;
  config.bias_scale = bias_scale;
  SyntheticData data = GenerateSynthetic(config, seed);
  const auto& ratings = data.dataset.ratings();
  RowMatrix triples(static_cast<Eigen::Index>(ratings.size()), 3);
  for (std::size_t k = 0; k < ratings.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    triples(row, 0) = static_cast<double>(ratings[k].user);
    triples(row, 1) = static_cast<double>(ratings[k].item);
    triples(row, 2) = ratings[k].value;
  }
  Eigen::VectorXd biases(n_items);
  RowMatrix item_latents(n_items, d);
  for (int j = 0; j < n_items; ++j) {
    biases(j) = data.truth.items[j].bias;
    item_latents.row(j) = data.truth.items[j].latent.transpose();
  }
  RowMatrix user_latents(n_users, d);
  std::vector<int> labels;
  for (int i = 0; i < n_users; ++i) {
    user_latents.row(i) = data.truth.users[i].latent.transpose();
    labels.push_back(static_cast<int>(data.truth.users[i].label));
  }
  py::dict out;
  out["ratings"] = triples;
  out["item_biases"] = biases;
  out["item_latents"] = item_latents;
  out["user_latents"] = user_latents;
  out["labels"] = labels;
  return out;
}

}  // namespace
}  // namespace privmf

PYBIND11_MODULE(_core, m) {
  using namespace privmf;
  m.doc() = "Midpoint protocol obfuscation, estimation and attacks";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("generate_synthetic", &GenerateSyntheticPy, py::arg("n_users") = 1000,
        py::arg("n_items") = 50, py::arg("d") = 5,
        py::arg("noise_sigma") = 0.5, py::arg("bias_scale") = 1.0,
        py::arg("seed") = 0,
        "Synthetic ratings as an (n, 3) array of user, item, rating plus the "
        "ground-truth profiles.");

  m.def(
      "mp_obfuscate",
      [](const std::vector<double>& ratings, int x0,
         const Eigen::VectorXd& biases) {
        std::vector<ItemId> ids(ratings.size());
        for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<ItemId>(k);
        return MpObfuscate(ratings, ToLabel(x0),
                           MakeDisclosure(ids, biases, std::nullopt))
            .values;
      },
      py::arg("ratings"), py::arg("x0"), py::arg("biases"),
      "y = r - x0 * bias for each disclosed item.");

  m.def(
      "subsampling_ratio",
      [](double p_plus, double p_minus) {
        return SubsamplingRatio({p_plus, p_minus});
      },
      py::arg("p_plus"), py::arg("p_minus"));
  m.def(
      "keep_probability",
      [](double ratio, int x0) { return KeepProbability(ratio, ToLabel(x0)); },
      py::arg("ratio"), py::arg("x0"));

  m.def(
      "mpss_obfuscate",
      [](const std::vector<ItemId>& ids, const std::vector<double>& ratings,
         int x0, const Eigen::VectorXd& biases, const Eigen::VectorXd& ratios,
         std::uint64_t seed) {
        if (ids.size() != ratings.size()) {
          throw py::value_error("ids and ratings must have equal length");
        }
        std::vector<ItemRating> rated;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          rated.push_back({ids[k], ratings[k]});
        }
        Rng rng(seed);
        auto fb = MpssObfuscate(rated, ToLabel(x0),
                                MakeDisclosure(ids, biases, ratios), rng);
        return std::make_tuple(fb.revealed, fb.values);
      },
      py::arg("ids"), py::arg("ratings"), py::arg("x0"), py::arg("biases"),
      py::arg("ratios"), py::arg("seed") = 0,
      "Sub-sampled midpoint feedback: (revealed ids, values).");

  m.def(
      "estimate_profile",
      [](const RowMatrix& latents, const Eigen::VectorXd& y, double ridge,
         double sigma) {
        if (latents.rows() != y.size()) {
          throw py::value_error("one latent row per observation is required");
        }
        NormalEquations eq(static_cast<int>(latents.cols()));
        for (Eigen::Index k = 0; k < y.size(); ++k) {
          eq.Add(latents.row(k).transpose(), y(k));
        }
        auto est = eq.Solve(ridge, sigma);
        return std::make_tuple(est.x_hat, est.expected_loss);
      },
      py::arg("latents"), py::arg("y"), py::arg("ridge") = kDefaultRidge,
      py::arg("sigma") = 1.0,
      "Least-squares profile and its expected squared error.");

  m.def(
      "theoretical_l2_loss",
      [](const RowMatrix& latents, double sigma) {
        std::vector<ExtendedItemProfile> slice;
        for (Eigen::Index j = 0; j < latents.rows(); ++j) {
          slice.push_back({j, 0.0, latents.row(j).transpose()});
        }
        return TheoreticalL2Loss(slice, sigma);
      },
      py::arg("latents"), py::arg("sigma"));

  m.def(
      "round_ratings",
      [](const std::vector<double>& values, int lo, int hi,
         std::uint64_t seed) {
        Rng rng(seed);
        return RoundRatings(values, lo, hi, rng);
      },
      py::arg("values"), py::arg("lo") = 1, py::arg("hi") = 5,
      py::arg("seed") = 0, "Unbiased stochastic rounding clamped to [lo, hi].");

  auto make_problem = [](const RowMatrix& latents, int budget) {
    std::vector<ExtendedItemProfile> profiles;
    for (Eigen::Index j = 0; j < latents.rows(); ++j) {
      profiles.push_back({j, 0.0, latents.row(j).transpose()});
    }
    return MakeSelectionProblem(Catalog(std::move(profiles)), budget);
  };
  m.def(
      "greedy_select",
      [make_problem](const RowMatrix& latents, int budget) {
        auto problem = make_problem(latents, budget);
        return std::make_tuple(problem.seed_set, GreedySelect(problem));
      },
      py::arg("latents"), py::arg("budget"),
      "(seed set, greedy picks) over rows of the latent matrix.");
  m.def(
      "brute_force_select",
      [make_problem](const RowMatrix& latents, int budget) {
        auto problem = make_problem(latents, budget);
        return std::make_tuple(problem.seed_set, BruteForceSelect(problem));
      },
      py::arg("latents"), py::arg("budget"));
  m.def(
      "a_optimality",
      [](const RowMatrix& latents) {
        std::vector<Eigen::VectorXd> rows;
        for (Eigen::Index j = 0; j < latents.rows(); ++j) {
          rows.push_back(latents.row(j).transpose());
        }
        return AOptimalityValue(rows, static_cast<int>(latents.cols()));
      },
      py::arg("latents"), "-tr[(sum v v^T)^-1]; -inf when singular.");

  m.def(
      "lse_attack",
      [](const Eigen::VectorXd& biases, const RowMatrix& latents,
         const std::vector<ItemId>& ids, const std::vector<double>& ratings,
         double ridge) {
        if (ids.size() != ratings.size()) {
          throw py::value_error("ids and ratings must have equal length");
        }
        std::vector<ItemRating> rated;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          rated.push_back({ids[k], ratings[k]});
        }
        auto result = LseAttack(rated, MakeCatalog(biases, latents), ridge);
        return std::make_tuple(static_cast<int>(result.label), result.score);
      },
      py::arg("biases"), py::arg("latents"), py::arg("ids"),
      py::arg("ratings"), py::arg("ridge") = 1e-8,
      "(inferred label, RSS- minus RSS+).");

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return Auc(scores, ToLabels(labels));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "rmse",
      [](const std::vector<double>& predicted,
         const std::vector<double>& actual) { return Rmse(predicted, actual); },
      py::arg("predicted"), py::arg("actual"));
}
