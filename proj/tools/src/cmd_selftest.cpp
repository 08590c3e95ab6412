/* Copyright 2026 The osrcnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>

#include "json.hpp"
#include "options.hpp"
#include "osrcnn/geometry.hpp"
#include "osrcnn/losses.hpp"
#include "osrcnn/rng.hpp"

namespace osrcnn::cli {

namespace {

struct CheckResult {
  std::string name;
  int instances = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed() const { return worst <= tolerance; }
};

using Vec = std::vector<double>;

Vec central_difference(const std::function<double(const Vec&)>& f, Vec x) {
  constexpr double h = 1e-6;
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double relative_error(const Vec& a, const Vec& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / denom;
}

Vec flatten(const Eigen::MatrixXd& m) {
  Vec v;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  return v;
}

Eigen::MatrixXd unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  return m;
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// True when no hinge or argmax is within `gap` of switching.
bool away_from_kinks(const Eigen::MatrixXd& z, const std::vector<int>& y, const Eigen::MatrixXd& p,
                     const Margins& m) {
  constexpr double gap = 1e-4;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Vec hinges;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const double d = 1.0 - z.row(i).dot(p.row(j)) / (z.row(i).norm() * p.row(j).norm());
      if (j == y[i]) {
        if (std::abs(d - m.positive) < gap) return false;
      } else {
        if (std::abs(d - m.negative) < gap) return false;
        hinges.push_back(m.negative - d);
      }
    }
    std::sort(hinges.rbegin(), hinges.rend());
    if (hinges.size() > 1 && hinges[0] > 0 && hinges[0] - hinges[1] < gap) return false;
  }
  return true;
}

CheckResult check_pln(Rng& rng, int count) {
  CheckResult r{"pln_loss gradient", 0, 0.0, 1e-5};
  const Margins m;
  while (r.instances < count) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int k = 1 + static_cast<int>(rng.below(4));
    const int d = 2 + static_cast<int>(rng.below(6));
    const auto z = random_matrix(rng, n, d);
    const auto p = random_matrix(rng, k, d);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    if (!away_from_kinks(z, y, p, m)) continue;
    const auto l = pln_loss(z, y, p, m);
    const auto fz = central_difference(
        [&](const Vec& v) { return pln_loss(unflatten(v, n, d), y, p, m).value; }, flatten(z));
    const auto fp = central_difference(
        [&](const Vec& v) { return pln_loss(z, y, unflatten(v, k, d), m).value; }, flatten(p));
    r.worst = std::max({r.worst, relative_error(flatten(l.grad_embeddings), fz),
                        relative_error(flatten(l.grad_prototypes), fp)});
    ++r.instances;
  }
  return r;
}

CheckResult check_smooth_l1(Rng& rng, int count) {
  CheckResult r{"smooth_l1 gradient", 0, 0.0, 1e-5};
  while (r.instances < count) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const double beta = rng.uniform(0.2, 2.0);
    Vec pred(n), target(n);
    bool clear = true;
    for (int i = 0; i < n; ++i) {
      target[i] = rng.normal();
      pred[i] = target[i] + 3 * rng.normal();
      clear = clear && std::abs(std::abs(pred[i] - target[i]) - beta) > 1e-4;
    }
    if (!clear) continue;
    const auto fd = central_difference([&](const Vec& v) { return smooth_l1(v, target, beta).value; }, pred);
    r.worst = std::max(r.worst, relative_error(smooth_l1(pred, target, beta).gradients[0], fd));
    ++r.instances;
  }
  return r;
}

CheckResult check_cross_entropy(Rng& rng, int count) {
  CheckResult r{"cross_entropy gradient", 0, 0.0, 1e-5};
  for (; r.instances < count; ++r.instances) {
    const int n = 2 + static_cast<int>(rng.below(8));
    Vec logits(n);
    for (auto& v : logits) v = 3 * rng.normal();
    const int label = static_cast<int>(rng.below(n));
    const auto fd = central_difference([&](const Vec& v) { return cross_entropy(v, label).value; }, logits);
    r.worst = std::max(r.worst, relative_error(cross_entropy(logits, label).gradients[0], fd));
  }
  return r;
}

Box random_box(Rng& rng) {
  const double w = rng.uniform(1, 40), h = rng.uniform(1, 40);
  const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
  return {x, y, x + w, y + h};
}

double overlap(const Box& a, const Box& b) {
  const double ox = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double oy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ox * oy;
  return inter / ((a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter);
}

// Counts instances where nms disagrees with the quadratic reference.
CheckResult check_nms(Rng& rng, int count) {
  CheckResult r{"nms vs brute force (mismatches)", count, 0.0, 0.0};
  for (int t = 0; t < count; ++t) {
    const std::size_t n = rng.below(51);
    std::vector<Box> boxes;
    Vec scores;
    for (std::size_t i = 0; i < n; ++i) {
      boxes.push_back(random_box(rng));
      scores.push_back(static_cast<double>(rng.below(20)) / 20.0);
    }
    const double thresh = rng.uniform(0.1, 0.9);
    std::vector<bool> alive(n, true);
    std::vector<std::size_t> expect;
    for (;;) {
      std::size_t best = n;
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i] && (best == n || scores[i] > scores[best])) best = i;
      if (best == n) break;
      expect.push_back(best);
      alive[best] = false;
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i] && overlap(boxes[best], boxes[i]) > thresh) alive[i] = false;
    }
    if (nms(boxes, scores, thresh) != expect) r.worst += 1.0;
  }
  return r;
}

CheckResult check_codecs(Rng& rng, int count) {
  CheckResult r{"ltrb/delta round trip", count, 0.0, 1e-9};
  auto rel = [](const Box& a, const Box& b) {
    const double scale = std::max({std::abs(a.x1), std::abs(a.y1), std::abs(a.x2), std::abs(a.y2), 1.0});
    return std::max({std::abs(a.x1 - b.x1), std::abs(a.y1 - b.y1), std::abs(a.x2 - b.x2),
                     std::abs(a.y2 - b.y2)}) / scale;
  };
  for (int t = 0; t < count; ++t) {
    const Box box = random_box(rng);
    const Location loc{rng.uniform(box.x1, box.x2), rng.uniform(box.y1, box.y2)};
    r.worst = std::max(r.worst, rel(decode_ltrb(loc, encode_ltrb(loc, box)), box));
    const Box base = random_box(rng), target = random_box(rng);
    r.worst = std::max(r.worst, rel(apply_delta(base, encode_delta(base, target)), target));
  }
  return r;
}

}  // namespace

Command add_selftest(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("selftest", "Check analytic gradients and geometry against "
                                              "finite differences and brute force");
  auto instances = std::make_shared<int>(100);
  auto opts = std::make_shared<OptionSet>(app);
  opts->add("instances", *instances, "Random instances per gradient check")->check(CLI::Range(1, 100000));

  auto run = [&g, &global_opts, instances, opts]() {
    Rng rng(g.seed);
    const std::vector<CheckResult> results{
        check_pln(rng, *instances), check_smooth_l1(rng, *instances),
        check_cross_entropy(rng, *instances), check_nms(rng, 10 * *instances),
        check_codecs(rng, 10 * *instances)};

    bool ok = true;
    nlohmann::ordered_json out = {{"format", "osrcnn-selftest"}, {"config", nlohmann::ordered_json::object()}};
    for (const auto& [k, v] : full_echo("selftest", global_opts, *opts)) out["config"][k] = v;
    out["checks"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      ok = ok && r.passed();
      char line[160];
      std::snprintf(line, sizeof(line), "%s  %-34s n=%-5d worst %.3e  tol %.0e\n",
                    r.passed() ? "PASS" : "FAIL", r.name.c_str(), r.instances, r.worst, r.tolerance);
      std::cout << line;
      out["checks"].push_back({{"name", r.name},
                               {"instances", r.instances},
                               {"worst", r.worst},
                               {"tolerance", r.tolerance},
                               {"passed", r.passed()}});
    }
    out["passed"] = ok;
    const auto dir = prepare_out_dir(g);
    write_text(dir / "selftest.json", out.dump(1) + "\n");
    if (!ok) {
      std::cerr << "osrcnn: selftest failed\n";
      return static_cast<int>(kSelftestFailed);
    }
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
