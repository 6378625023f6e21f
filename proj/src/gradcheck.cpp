#include "woodnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "woodnet/error.hpp"
#include "woodnet/optim.hpp"

namespace woodnet {

bool GradCheckReport::passed() const {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

double gradient_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

namespace {

constexpr double kStep = 1e-3;

double step_for(double x) { return kStep * std::max(1.0, std::abs(x)); }

TensorD random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t(std::move(shape));
  for (auto& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

void randomize_params(Layer<double>& layer, Rng& rng) {
  for (auto* p : layer.params())
    for (auto& v : p->value.values()) v = uniform(rng, -1.0, 1.0);
}

}  // namespace

GradCheckResult check_layer_gradients(const std::string& name, const ProbeFactory& factory,
                                      std::uint64_t seed, std::size_t configurations,
                                      double tolerance) {
  GradCheckResult result{name, 0.0, configurations, 0, false};
  for (std::size_t cfg = 0; cfg < configurations; ++cfg) {
    Rng rng(stream_key({seed, cfg, fnv1a64(name)}));
    GradProbe probe = factory(rng);
    Layer<double>& layer = *probe.layer;
    TensorD x = probe.input;
    // Train mode with a fixed (seed, step): dropout reuses one mask throughout.
    const ForwardContext ctx{Mode::train, seed, cfg, 0};

    const TensorD out = layer.forward(x, ctx);
    const TensorD proj = random_tensor(out.shape(), rng);
    const auto loss = [&](const TensorD& input) {
      const TensorD y = layer.forward(input, ctx);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * proj[i];
      return s;
    };

    for (auto* p : layer.params()) p->zero_grad();
    layer.forward(x, ctx);
    const TensorD grad_in = layer.backward(proj);

    const auto record = [&](double analytic, double numeric) {
      result.max_relative_error = std::max(result.max_relative_error, gradient_relative_error(analytic, numeric));
      ++result.checked_values;
    };

    for (std::size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i], h = step_for(orig);
      x[i] = orig + h;
      const double up = loss(x);
      x[i] = orig - h;
      const double down = loss(x);
      x[i] = orig;
      record(grad_in[i], (up - down) / (2 * h));
    }
    for (auto* p : layer.params()) {
      const TensorD analytic = p->grad;
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double orig = p->value[i], h = step_for(orig);
        p->value[i] = orig + h;
        const double up = loss(x);
        p->value[i] = orig - h;
        const double down = loss(x);
        p->value[i] = orig;
        record(analytic[i], (up - down) / (2 * h));
      }
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

GradCheckResult check_cross_entropy_gradients(std::uint64_t seed, std::size_t configurations,
                                              double tolerance) {
  GradCheckResult result{"cross_entropy", 0.0, configurations, 0, false};
  for (std::size_t cfg = 0; cfg < configurations; ++cfg) {
    Rng rng(stream_key({seed, cfg, fnv1a64("cross_entropy")}));
    const std::size_t batch = pick(rng, 1, 4), classes = pick(rng, 2, 6);
    TensorD logits = random_tensor({batch, classes}, rng, -3.0, 3.0);
    std::vector<std::size_t> labels(batch);
    for (auto& l : labels) l = pick(rng, 0, classes - 1);
    const auto analytic = cross_entropy(logits, labels).grad_logits;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double orig = logits[i], h = step_for(orig);
      logits[i] = orig + h;
      const double up = cross_entropy(logits, labels).mean_loss;
      logits[i] = orig - h;
      const double down = cross_entropy(logits, labels).mean_loss;
      logits[i] = orig;
      result.max_relative_error =
          std::max(result.max_relative_error, gradient_relative_error(analytic[i], (up - down) / (2 * h)));
      ++result.checked_values;
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

ProbeFactory probe_factory(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d:
      return [](Rng& rng) {
        while (true) {
          const std::size_t in = pick(rng, 1, 3), out = pick(rng, 1, 3);
          const std::size_t k = pick(rng, 1, 3), stride = pick(rng, 1, 2), pad = pick(rng, 0, 1);
          const std::size_t h = pick(rng, 3, 6), w = pick(rng, 3, 6), batch = pick(rng, 1, 2);
          ConvGeometry geo{in, h, w, k, k, stride, pad};
          try {
            geo.validate();
          } catch (const ShapeError&) {
            continue;
          }
          GradProbe probe{make_layer<double>(LayerDesc::conv2d(in, out, k, stride, pad)),
                          random_tensor({batch, in, h, w}, rng)};
          randomize_params(*probe.layer, rng);
          return probe;
        }
      };
    case LayerKind::maxpool2d:
      return [](Rng& rng) {
        const std::size_t batch = pick(rng, 1, 2), ch = pick(rng, 1, 3);
        const std::size_t h = 2 * pick(rng, 1, 3), w = 2 * pick(rng, 1, 3);
        TensorD x({batch, ch, h, w});
        // Distinct values spaced 0.05 apart keep every window's winner stable
        // under the finite-difference nudges.
        std::vector<std::size_t> rank(x.size());
        std::iota(rank.begin(), rank.end(), 0);
        for (std::size_t i = rank.size(); i > 1; --i) std::swap(rank[i - 1], rank[rng() % i]);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05 * static_cast<double>(rank[i]) - 1.0;
        return GradProbe{make_layer<double>(LayerDesc::maxpool2d()), std::move(x)};
      };
    case LayerKind::relu:
      return [](Rng& rng) {
        TensorD x({pick(rng, 1, 3), pick(rng, 2, 12)});
        for (auto& v : x.values()) {
          do v = uniform(rng, -1.0, 1.0);
          while (std::abs(v) <= 1e-2);
        }
        return GradProbe{make_layer<double>(LayerDesc::relu()), std::move(x)};
      };
    case LayerKind::linear:
      return [](Rng& rng) {
        const std::size_t in = pick(rng, 1, 6), out = pick(rng, 1, 5);
        GradProbe probe{make_layer<double>(LayerDesc::linear(in, out)), random_tensor({pick(rng, 1, 3), in}, rng)};
        randomize_params(*probe.layer, rng);
        return probe;
      };
    case LayerKind::dropout:
      return [](Rng& rng) {
        const double p = uniform(rng, 0.1, 0.7);
        return GradProbe{make_layer<double>(LayerDesc::dropout(p)),
                         random_tensor({pick(rng, 1, 3), pick(rng, 4, 16)}, rng)};
      };
    case LayerKind::flatten:
      return [](Rng& rng) {
        return GradProbe{make_layer<double>(LayerDesc::flatten()),
                         random_tensor({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 3)}, rng)};
      };
  }
  throw ConfigError("no gradient probe for this layer kind");
}

GradCheckReport run_gradcheck(const std::string& which, std::uint64_t seed) {
  static constexpr LayerKind kAll[] = {LayerKind::conv2d, LayerKind::maxpool2d, LayerKind::relu,
                                       LayerKind::linear, LayerKind::dropout, LayerKind::flatten};
  GradCheckReport report;
  const bool all = which == "all";
  for (LayerKind kind : kAll)
    if (all || which == to_string(kind))
      report.results.push_back(check_layer_gradients(std::string(to_string(kind)), probe_factory(kind), seed));
  if (all || which == "cross_entropy") report.results.push_back(check_cross_entropy_gradients(seed));
  if (report.results.empty())
    throw ConfigError("unknown gradcheck target '" + which + "'");
  return report;
}

}  // namespace woodnet
