#include "ramanpd/surrogate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "ramanpd/error.hpp"
#include "ramanpd/rng.hpp"

namespace rpd {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;
using MapVector = Eigen::Map<Eigen::VectorXd>;
using ConstMapVector = Eigen::Map<const Eigen::VectorXd>;

std::size_t pooled(std::size_t n) { return (n + 1) / 2; }

/// Offsets of every parameter block inside the flat blob.
struct Layout {
  std::vector<std::size_t> conv_w, conv_b;
  std::size_t d1_w = 0, d1_b = 0, d2_w = 0, d2_b = 0, total = 0;

  explicit Layout(const NetworkSpec& s) {
    std::size_t off = 0;
    std::size_t in_ch = 1;
    for (std::size_t f : s.conv_filters) {
      conv_w.push_back(off);
      off += f * in_ch * s.kernel * s.kernel;
      conv_b.push_back(off);
      off += f;
      in_ch = f;
    }
    d1_w = off;
    off += s.dense_units * s.flatten_size();
    d1_b = off;
    off += s.dense_units;
    d2_w = off;
    off += s.outputs * s.dense_units;
    d2_b = off;
    off += s.outputs;
    total = off;
  }
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void NetworkSpec::validate() const {
  require(input_rows > 0 && input_cols > 0, ErrorCode::invalid_argument, "input shape must be non-empty");
  require(!conv_filters.empty(), ErrorCode::invalid_argument, "need at least one conv layer");
  require(kernel % 2 == 1, ErrorCode::invalid_argument, "same padding needs an odd kernel");
  require(dense_units > 0 && outputs > 0, ErrorCode::invalid_argument, "dense layers must be non-empty");
  for (std::size_t f : conv_filters) require(f > 0, ErrorCode::invalid_argument, "filter counts must be positive");
}

TensorShape NetworkSpec::conv_input_shape(std::size_t layer) const {
  require(layer <= conv_filters.size(), ErrorCode::invalid_argument, "layer index out of range");
  TensorShape s{1, input_rows, input_cols};
  for (std::size_t l = 0; l < layer; ++l) s = {conv_filters[l], pooled(s.rows), pooled(s.cols)};
  return s;
}

std::size_t NetworkSpec::flatten_size() const { return conv_input_shape(conv_filters.size()).size(); }

std::size_t NetworkSpec::parameter_count() const { return Layout(*this).total; }

Network Network::zeros(const NetworkSpec& spec) {
  spec.validate();
  return Network{spec, std::vector<double>(spec.parameter_count(), 0.0)};
}

Network Network::initialize(const NetworkSpec& spec, std::uint64_t seed) {
  Network net = zeros(spec);
  const Layout lay(spec);
  Rng rng(seed);
  auto fill = [&](std::size_t off, std::size_t count, double limit) {
    for (std::size_t i = 0; i < count; ++i) net.params[off + i] = rng.uniform(-limit, limit);
  };
  std::size_t in_ch = 1;
  const std::size_t k2 = spec.kernel * spec.kernel;
  for (std::size_t l = 0; l < spec.conv_filters.size(); ++l) {
    const std::size_t fan_in = in_ch * k2;
    fill(lay.conv_w[l], spec.conv_filters[l] * fan_in, std::sqrt(6.0 / static_cast<double>(fan_in)));
    in_ch = spec.conv_filters[l];
  }
  fill(lay.d1_w, spec.dense_units * spec.flatten_size(), std::sqrt(6.0 / static_cast<double>(spec.flatten_size())));
  fill(lay.d2_w, spec.outputs * spec.dense_units, std::sqrt(3.0 / static_cast<double>(spec.dense_units)));
  return net;
}

struct Workspace::Impl {
  struct ConvCache {
    TensorShape in;
    std::size_t filters = 0;
    RowMatrix input;  // C x HW
    RowMatrix col;    // C k k x HW
    RowMatrix z;      // F x HW
    RowMatrix pooled;  // F x H2 W2
    std::vector<std::size_t> argmax;
    RowMatrix d_pooled, d_z, d_col;
  };

  NetworkSpec spec;
  Layout layout;
  std::vector<ConvCache> conv;
  Eigen::VectorXd h0, z1, a1, z2, y, d_z2, d_z1, d_h0;

  explicit Impl(const NetworkSpec& s) : spec(s), layout(s) {
    s.validate();
    conv.resize(s.conv_filters.size());
    for (std::size_t l = 0; l < conv.size(); ++l) {
      auto& c = conv[l];
      c.in = s.conv_input_shape(l);
      c.filters = s.conv_filters[l];
      const std::size_t hw = c.in.rows * c.in.cols;
      const std::size_t phw = pooled(c.in.rows) * pooled(c.in.cols);
      const std::size_t k2 = s.kernel * s.kernel;
      c.input.resize(static_cast<Eigen::Index>(c.in.channels), static_cast<Eigen::Index>(hw));
      c.col.resize(static_cast<Eigen::Index>(c.in.channels * k2), static_cast<Eigen::Index>(hw));
      c.z.resize(static_cast<Eigen::Index>(c.filters), static_cast<Eigen::Index>(hw));
      c.pooled.resize(static_cast<Eigen::Index>(c.filters), static_cast<Eigen::Index>(phw));
      c.argmax.resize(c.filters * phw);
    }
  }

  void im2col(ConvCache& c) const {
    const std::size_t H = c.in.rows, W = c.in.cols, k = spec.kernel;
    const auto half = static_cast<std::ptrdiff_t>(k / 2);
    for (std::size_t ch = 0; ch < c.in.channels; ++ch) {
      const double* src = c.input.data() + ch * H * W;
      for (std::size_t di = 0; di < k; ++di)
        for (std::size_t dj = 0; dj < k; ++dj) {
          double* dst = c.col.data() + ((ch * k + di) * k + dj) * H * W;
          const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(di) - half;
          const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dj) - half;
          const std::size_t x_lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -ox));
          const std::size_t x_hi = static_cast<std::size_t>(
              std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(W), static_cast<std::ptrdiff_t>(W) - ox));
          for (std::size_t y = 0; y < H; ++y) {
            double* drow = dst + y * W;
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + oy;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(H)) {
              std::fill(drow, drow + W, 0.0);
              continue;
            }
            const double* srow = src + static_cast<std::size_t>(sy) * W;
            std::fill(drow, drow + x_lo, 0.0);
            std::copy(srow + static_cast<std::ptrdiff_t>(x_lo) + ox, srow + static_cast<std::ptrdiff_t>(x_hi) + ox,
                      drow + x_lo);
            std::fill(drow + x_hi, drow + W, 0.0);
          }
        }
    }
  }

  void col2im(const ConvCache& c, RowMatrix& d_input) const {
    const std::size_t H = c.in.rows, W = c.in.cols, k = spec.kernel;
    const auto half = static_cast<std::ptrdiff_t>(k / 2);
    d_input.setZero(static_cast<Eigen::Index>(c.in.channels), static_cast<Eigen::Index>(H * W));
    for (std::size_t ch = 0; ch < c.in.channels; ++ch) {
      double* dst = d_input.data() + ch * H * W;
      for (std::size_t di = 0; di < k; ++di)
        for (std::size_t dj = 0; dj < k; ++dj) {
          const double* src = c.d_col.data() + ((ch * k + di) * k + dj) * H * W;
          const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(di) - half;
          const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dj) - half;
          const std::size_t x_lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -ox));
          const std::size_t x_hi = static_cast<std::size_t>(
              std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(W), static_cast<std::ptrdiff_t>(W) - ox));
          for (std::size_t y = 0; y < H; ++y) {
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + oy;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(H)) continue;
            double* drow = dst + static_cast<std::size_t>(sy) * W;
            const double* srow = src + y * W;
            for (std::size_t x = x_lo; x < x_hi; ++x)
              drow[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + ox)] += srow[x];
          }
        }
    }
  }

  // ReLU is applied inside the pool; ties keep the first element.
  void pool(ConvCache& c) const {
    const std::size_t H = c.in.rows, W = c.in.cols;
    const std::size_t H2 = pooled(H), W2 = pooled(W);
    for (std::size_t f = 0; f < c.filters; ++f) {
      const double* z = c.z.data() + f * H * W;
      double* out = c.pooled.data() + f * H2 * W2;
      std::size_t* arg = c.argmax.data() + f * H2 * W2;
      for (std::size_t oy = 0; oy < H2; ++oy) {
        const std::size_t y0 = 2 * oy;
        const bool two_rows = y0 + 1 < H;
        for (std::size_t ox = 0; ox < W2; ++ox) {
          const std::size_t x0 = 2 * ox;
          std::size_t best = y0 * W + x0;
          double best_v = std::max(0.0, z[best]);
          auto consider = [&](std::size_t idx) {
            const double v = std::max(0.0, z[idx]);
            if (v > best_v) {
              best_v = v;
              best = idx;
            }
          };
          const bool two_cols = x0 + 1 < W;
          if (two_cols) consider(y0 * W + x0 + 1);
          if (two_rows) {
            consider((y0 + 1) * W + x0);
            if (two_cols) consider((y0 + 1) * W + x0 + 1);
          }
          out[oy * W2 + ox] = best_v;
          arg[oy * W2 + ox] = best;
        }
      }
    }
  }

  void run_forward(const std::vector<double>& params, std::span<const double> input) {
    const std::size_t k2 = spec.kernel * spec.kernel;
    require(input.size() == spec.input_rows * spec.input_cols, ErrorCode::invalid_argument,
            "input size does not match network spec");
    std::copy(input.begin(), input.end(), conv[0].input.data());
    for (std::size_t l = 0; l < conv.size(); ++l) {
      auto& c = conv[l];
      if (l > 0) c.input = conv[l - 1].pooled;
      im2col(c);
      ConstMapMatrix w(params.data() + layout.conv_w[l], static_cast<Eigen::Index>(c.filters),
                       static_cast<Eigen::Index>(c.in.channels * k2));
      ConstMapVector b(params.data() + layout.conv_b[l], static_cast<Eigen::Index>(c.filters));
      c.z.noalias() = w * c.col;
      c.z.colwise() += b;
      pool(c);
    }
    const auto& last = conv.back().pooled;
    h0 = Eigen::Map<const Eigen::VectorXd>(last.data(), last.size());
    const auto flat = static_cast<Eigen::Index>(spec.flatten_size());
    const auto units = static_cast<Eigen::Index>(spec.dense_units);
    const auto outs = static_cast<Eigen::Index>(spec.outputs);
    ConstMapMatrix w1(params.data() + layout.d1_w, units, flat);
    ConstMapVector b1(params.data() + layout.d1_b, units);
    ConstMapMatrix w2(params.data() + layout.d2_w, outs, units);
    ConstMapVector b2(params.data() + layout.d2_b, outs);
    z1.noalias() = w1 * h0;
    z1 += b1;
    a1 = z1.cwiseMax(0.0);
    z2.noalias() = w2 * a1;
    z2 += b2;
    y = z2.unaryExpr([](double v) { return logistic(v); });
  }

  /// Accumulates dLoss/dparams given dLoss/dy.
  void run_backward(const std::vector<double>& params, const Eigen::VectorXd& d_y, std::vector<double>& grad) {
    const std::size_t k2 = spec.kernel * spec.kernel;
    const auto flat = static_cast<Eigen::Index>(spec.flatten_size());
    const auto units = static_cast<Eigen::Index>(spec.dense_units);
    const auto outs = static_cast<Eigen::Index>(spec.outputs);
    ConstMapMatrix w1(params.data() + layout.d1_w, units, flat);
    ConstMapMatrix w2(params.data() + layout.d2_w, outs, units);
    MapMatrix gw1(grad.data() + layout.d1_w, units, flat);
    MapVector gb1(grad.data() + layout.d1_b, units);
    MapMatrix gw2(grad.data() + layout.d2_w, outs, units);
    MapVector gb2(grad.data() + layout.d2_b, outs);

    d_z2 = d_y.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
    gw2.noalias() += d_z2 * a1.transpose();
    gb2 += d_z2;
    d_z1.noalias() = w2.transpose() * d_z2;
    for (Eigen::Index i = 0; i < units; ++i)
      if (!(z1[i] > 0.0)) d_z1[i] = 0.0;
    gw1.noalias() += d_z1 * h0.transpose();
    gb1 += d_z1;
    d_h0.noalias() = w1.transpose() * d_z1;

    auto& last = conv.back();
    last.d_pooled = Eigen::Map<const RowMatrix>(d_h0.data(), last.pooled.rows(), last.pooled.cols());

    for (std::size_t l = conv.size(); l-- > 0;) {
      auto& c = conv[l];
      const std::size_t hw = c.in.rows * c.in.cols;
      const std::size_t phw = static_cast<std::size_t>(c.pooled.cols());
      c.d_z.setZero(static_cast<Eigen::Index>(c.filters), static_cast<Eigen::Index>(hw));
      for (std::size_t f = 0; f < c.filters; ++f) {
        const double* dp = c.d_pooled.data() + f * phw;
        const std::size_t* arg = c.argmax.data() + f * phw;
        const double* z = c.z.data() + f * hw;
        double* dz = c.d_z.data() + f * hw;
        for (std::size_t o = 0; o < phw; ++o)
          if (z[arg[o]] > 0.0) dz[arg[o]] += dp[o];
      }
      MapMatrix gw(grad.data() + layout.conv_w[l], static_cast<Eigen::Index>(c.filters),
                   static_cast<Eigen::Index>(c.in.channels * k2));
      MapVector gb(grad.data() + layout.conv_b[l], static_cast<Eigen::Index>(c.filters));
      gw.noalias() += c.d_z * c.col.transpose();
      gb += c.d_z.rowwise().sum();
      if (l > 0) {
        ConstMapMatrix w(params.data() + layout.conv_w[l], static_cast<Eigen::Index>(c.filters),
                         static_cast<Eigen::Index>(c.in.channels * k2));
        c.d_col.noalias() = w.transpose() * c.d_z;
        col2im(c, conv[l - 1].d_pooled);
      }
    }
  }
};

Workspace::Workspace(const NetworkSpec& spec) : impl_(std::make_unique<Impl>(spec)) {}
Workspace::~Workspace() = default;
Workspace::Workspace(Workspace&&) noexcept = default;
Workspace& Workspace::operator=(Workspace&&) noexcept = default;

namespace {

void check_network(const Network& net, Workspace& ws) {
  require(net.params.size() == net.spec.parameter_count(), ErrorCode::invalid_argument,
          "parameter blob does not match network spec");
  require(ws.impl().spec == net.spec, ErrorCode::invalid_argument, "workspace built for a different spec");
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> input, Workspace& ws) {
  check_network(net, ws);
  auto& im = ws.impl();
  im.run_forward(net.params, input);
  return {im.y.data(), im.y.data() + im.y.size()};
}

std::vector<double> forward(const Network& net, std::span<const double> input) {
  Workspace ws(net.spec);
  return forward(net, input, ws);
}

double loss_and_gradient(const Network& net, std::span<const BatchItem> batch, std::vector<double>& grad,
                         Workspace& ws) {
  check_network(net, ws);
  require(!batch.empty(), ErrorCode::invalid_argument, "batch is empty");
  auto& im = ws.impl();
  grad.assign(net.params.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size() * net.spec.outputs);
  double total = 0.0;
  Eigen::VectorXd d_y(static_cast<Eigen::Index>(net.spec.outputs));
  for (const auto& item : batch) {
    require(item.target.size() == net.spec.outputs, ErrorCode::invalid_argument, "target size mismatch");
    im.run_forward(net.params, item.input);
    for (std::size_t k = 0; k < net.spec.outputs; ++k) {
      const double e = im.y[static_cast<Eigen::Index>(k)] - item.target[k];
      total += e * e;
      d_y[static_cast<Eigen::Index>(k)] = 2.0 * e * scale;
    }
    im.run_backward(net.params, d_y, grad);
  }
  return total * scale;
}

double loss(const Network& net, std::span<const BatchItem> batch, Workspace& ws) {
  check_network(net, ws);
  require(!batch.empty(), ErrorCode::invalid_argument, "batch is empty");
  auto& im = ws.impl();
  double total = 0.0;
  for (const auto& item : batch) {
    im.run_forward(net.params, item.input);
    for (std::size_t k = 0; k < net.spec.outputs; ++k) {
      const double e = im.y[static_cast<Eigen::Index>(k)] - item.target[k];
      total += e * e;
    }
  }
  return total / static_cast<double>(batch.size() * net.spec.outputs);
}

Normalizer Normalizer::fit(std::span<const Sample> train) {
  require(!train.empty(), ErrorCode::invalid_argument, "cannot fit normalizer on an empty set");
  Normalizer n;
  for (std::size_t i = 0; i < kPumpCount; ++i) {
    n.output_lo[i] = standard_pumps()[i].min_mw;
    n.output_hi[i] = standard_pumps()[i].max_mw;
  }
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& s : train)
    for (float v : s.profile_dbm) {
      sum += v;
      sum_sq += static_cast<double>(v) * v;
      ++count;
    }
  n.input_mean = sum / static_cast<double>(count);
  const double var = sum_sq / static_cast<double>(count) - n.input_mean * n.input_mean;
  n.input_std = var > 1e-24 ? std::sqrt(var) : 1.0;
  return n;
}

void Normalizer::normalize_input(std::span<const float> dbm, std::span<double> out) const {
  for (std::size_t i = 0; i < dbm.size(); ++i) out[i] = (static_cast<double>(dbm[i]) - input_mean) / input_std;
}

void Normalizer::normalize_input(std::span<const double> dbm, std::span<double> out) const {
  for (std::size_t i = 0; i < dbm.size(); ++i) out[i] = (dbm[i] - input_mean) / input_std;
}

void TrainConfig::validate() const {
  require(batch_size > 0 && max_epochs > 0, ErrorCode::invalid_argument, "batch size and epochs must be positive");
  require(learning_rate > 0.0, ErrorCode::invalid_argument, "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::invalid_argument,
          "Adam betas must be in [0, 1)");
}

SurrogateModel::SurrogateModel(Network net, Normalizer norm, std::uint64_t seed)
    : net_(std::move(net)), norm_(norm), seed_(seed) {
  require(net_.params.size() == net_.spec.parameter_count(), ErrorCode::invalid_argument,
          "parameter blob does not match network spec");
}

std::vector<double> SurrogateModel::forward(const PowerProfile2D& profile) const {
  require(profile.rows() == net_.spec.input_rows && profile.cols() == net_.spec.input_cols,
          ErrorCode::invalid_argument, "profile shape does not match the network input");
  std::vector<double> in(profile.values().size());
  norm_.normalize_input(std::span<const double>(profile.values()), in);
  return rpd::forward(net_, in);
}

PumpConfig SurrogateModel::predict_pumps(const PowerProfile2D& profile) const {
  const auto y = forward(profile);
  PumpConfig p;
  for (std::size_t i = 0; i < kPumpCount; ++i) p.powers_mw[i] = norm_.denormalize_pump(i, y[i]);
  return p;
}

PumpConfig SurrogateModel::predict_pumps(std::span<const float> profile_dbm) const {
  require(profile_dbm.size() == net_.spec.input_rows * net_.spec.input_cols, ErrorCode::invalid_argument,
          "profile size does not match the network input");
  std::vector<double> in(profile_dbm.size());
  norm_.normalize_input(profile_dbm, in);
  const auto y = rpd::forward(net_, in);
  PumpConfig p;
  for (std::size_t i = 0; i < kPumpCount; ++i) p.powers_mw[i] = norm_.denormalize_pump(i, y[i]);
  return p;
}

void SurrogateModel::save(const std::filesystem::path& dir, const std::string& config_hash) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create model directory " + dir.string());
  const auto& s = net_.spec;
  nlohmann::ordered_json j;
  j["format"] = "ramanpd-surrogate-v1";
  j["spec"] = {{"input_rows", s.input_rows}, {"input_cols", s.input_cols}, {"conv_filters", s.conv_filters},
               {"kernel", s.kernel},         {"dense_units", s.dense_units}, {"outputs", s.outputs}};
  j["normalizer"] = {{"input_mean", norm_.input_mean},
                     {"input_std", norm_.input_std},
                     {"output_lo", norm_.output_lo},
                     {"output_hi", norm_.output_hi}};
  j["seed"] = seed_;
  j["parameter_count"] = net_.params.size();
  j["weights_file"] = "weights.bin";
  j["weight_format"] = "le_f64";
  j["layer_order"] = "conv[l].W[F][C][k][k], conv[l].b[F] for each l; dense1.W[U][flat], dense1.b[U]; "
                     "dense2.W[out][U], dense2.b[out]";
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  std::ofstream mj(dir / "model.json", std::ios::binary | std::ios::trunc);
  mj << j.dump(2) << '\n';
  std::ofstream wb(dir / "weights.bin", std::ios::binary | std::ios::trunc);
  detail::write_le_f64(wb, net_.params);
  require(static_cast<bool>(mj) && static_cast<bool>(wb), ErrorCode::io, "error writing model files");
}

SurrogateModel SurrogateModel::load(const std::filesystem::path& dir) {
  std::ifstream mj(dir / "model.json", std::ios::binary);
  require(static_cast<bool>(mj), ErrorCode::not_found, "cannot open " + (dir / "model.json").string());
  try {
    const auto j = nlohmann::json::parse(mj);
    NetworkSpec s;
    const auto& js = j.at("spec");
    s.input_rows = js.at("input_rows").get<std::size_t>();
    s.input_cols = js.at("input_cols").get<std::size_t>();
    s.conv_filters = js.at("conv_filters").get<std::vector<std::size_t>>();
    s.kernel = js.at("kernel").get<std::size_t>();
    s.dense_units = js.at("dense_units").get<std::size_t>();
    s.outputs = js.at("outputs").get<std::size_t>();
    s.validate();
    Normalizer n;
    const auto& jn = j.at("normalizer");
    n.input_mean = jn.at("input_mean").get<double>();
    n.input_std = jn.at("input_std").get<double>();
    n.output_lo = jn.at("output_lo").get<std::array<double, kPumpCount>>();
    n.output_hi = jn.at("output_hi").get<std::array<double, kPumpCount>>();
    Network net{s, std::vector<double>(s.parameter_count())};
    require(j.at("parameter_count").get<std::size_t>() == net.params.size(), ErrorCode::invalid_argument,
            "parameter count does not match spec");
    std::ifstream wb(dir / j.value("weights_file", std::string("weights.bin")), std::ios::binary);
    require(static_cast<bool>(wb), ErrorCode::not_found, "cannot open weights file");
    require(detail::read_le_f64(wb, net.params), ErrorCode::io, "truncated weights file");
    return SurrogateModel(std::move(net), n, j.value("seed", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed model manifest: ") + e.what());
  }
}

namespace {

struct PreparedSet {
  std::vector<std::vector<double>> inputs;
  std::vector<std::array<double, kPumpCount>> targets;
  std::vector<BatchItem> items;
};

PreparedSet prepare(std::span<const Sample> samples, const Normalizer& norm, const NetworkSpec& spec) {
  PreparedSet set;
  set.inputs.resize(samples.size());
  set.targets.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(samples[i].profile_dbm.size() == spec.input_rows * spec.input_cols, ErrorCode::invalid_argument,
            "sample profile does not match the network input");
    set.inputs[i].resize(samples[i].profile_dbm.size());
    norm.normalize_input(samples[i].profile_dbm, set.inputs[i]);
    for (std::size_t k = 0; k < kPumpCount; ++k) set.targets[i][k] = norm.normalize_pump(k, samples[i].pumps_mw[k]);
  }
  set.items.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) set.items[i] = {set.inputs[i], set.targets[i]};
  return set;
}

}  // namespace

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const NetworkSpec& spec,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  spec.validate();
  require(spec.outputs == kPumpCount, ErrorCode::invalid_argument, "network must output eight pumps");
  require(!train_set.empty() && !val_set.empty(), ErrorCode::invalid_argument,
          "training and validation sets must be non-empty");

  const Normalizer norm = Normalizer::fit(train_set);
  const PreparedSet tr = prepare(train_set, norm, spec);
  const PreparedSet va = prepare(val_set, norm, spec);

  Network net = Network::initialize(spec, cfg.seed);
  Workspace ws(spec);
  Rng shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  const std::size_t np = net.params.size();
  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<std::size_t> order(tr.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<BatchItem> batch;
  std::uint64_t step = 0;

  TrainResult result;
  result.best_val_mse = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = net.params;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double train_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      batch.clear();
      for (std::size_t i = first; i < last; ++i) batch.push_back(tr.items[order[i]]);
      const double l = loss_and_gradient(net, batch, grad, ws);
      train_sum += l * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < np; ++p) {
        m[p] = cfg.beta1 * m[p] + (1.0 - cfg.beta1) * grad[p];
        v[p] = cfg.beta2 * v[p] + (1.0 - cfg.beta2) * grad[p] * grad[p];
        net.params[p] -= cfg.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + cfg.epsilon);
      }
    }
    EpochRecord rec{epoch, train_sum / static_cast<double>(order.size()), loss(net, va.items, ws)};
    require(std::isfinite(rec.val_mse), ErrorCode::runtime,
            "training diverged at epoch " + std::to_string(epoch) + " (validation MSE is not finite)");
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_mse < result.best_val_mse) {
      result.best_val_mse = rec.val_mse;
      result.best_epoch = epoch;
      best_params = net.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.stopped_early = true;
      break;
    }
  }
  net.params = std::move(best_params);
  result.model = SurrogateModel(std::move(net), norm, cfg.seed);
  return result;
}

double evaluate_mse(const SurrogateModel& model, std::span<const Sample> samples) {
  require(!samples.empty(), ErrorCode::invalid_argument, "sample set is empty");
  const PreparedSet set = prepare(samples, model.normalizer(), model.network().spec);
  Workspace ws(model.network().spec);
  return loss(model.network(), set.items, ws);
}

std::array<std::optional<double>, kPumpCount> r_squared(std::span<const PumpConfig> predictions,
                                                        std::span<const PumpConfig> truths) {
  require(predictions.size() == truths.size(), ErrorCode::invalid_argument, "prediction/truth count mismatch");
  require(truths.size() >= 2, ErrorCode::invalid_argument, "R^2 needs at least two samples");
  std::array<std::optional<double>, kPumpCount> out;
  const double n = static_cast<double>(truths.size());
  for (std::size_t k = 0; k < kPumpCount; ++k) {
    double mean = 0.0;
    for (const auto& t : truths) mean += t.powers_mw[k];
    mean /= n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      const double t = truths[i].powers_mw[k];
      const double e = predictions[i].powers_mw[k] - t;
      ss_res += e * e;
      ss_tot += (t - mean) * (t - mean);
    }
    if (ss_tot > 0.0) out[k] = 1.0 - ss_res / ss_tot;
  }
  return out;
}

double e_max(const PowerProfile2D& truth, const PowerProfile2D& predicted) {
  require(truth.rows() == predicted.rows() && truth.cols() == predicted.cols(), ErrorCode::invalid_argument,
          "profiles have different shapes");
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.values().size(); ++i)
    worst = std::max(worst, std::abs(truth.values()[i] - predicted.values()[i]));
  return worst;
}

void write_learning_curve_csv(std::span<const EpochRecord> curve, std::ostream& out, const std::string& config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "epoch,train_mse,val_mse\n";
  char buf[96];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e,%.9e\n", r.epoch, r.train_mse, r.val_mse);
    out << buf;
  }
}

}  // namespace rpd
