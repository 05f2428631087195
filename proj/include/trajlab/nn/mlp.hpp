#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "trajlab/contract.hpp"
#include "trajlab/nn/gemm.hpp"
#include "trajlab/rng.hpp"

namespace trajlab::nn {

enum class OutputActivation { kIdentity, kTanh };

// Fully connected net with ReLU hidden layers and a manual backward pass.
// All math is in binary64. Parameters live in one flat vector laid out
// [W0, b0, W1, b1, ...] with W row-major (out x in); gradients and Adam
// moments share the layout, so optimizer and target-network updates are
// plain loops over the flat storage.
class Mlp {
 public:
  Mlp() = default;

  // Weight init: U(+-1/sqrt(fan_in)), biases zero. `final_scale` multiplies
  // the last layer's weights (actors use 0.01 so the initial policy output
  // is near zero).
  Mlp(std::vector<int> sizes, OutputActivation output, std::uint64_t seed,
      double final_scale = 1.0)
      : sizes_(std::move(sizes)), output_(output) {
    check_contract(sizes_.size() >= 2, "mlp: need at least input and output sizes");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      RngStream rng(derive_stream(seed, 0x6d6c70ULL, l));
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      const double scale = (l + 2 == sizes_.size()) ? final_scale : 1.0;
      double* w = weights(l);
      for (int i = 0; i < sizes_[l + 1] * sizes_[l]; ++i) {
        w[i] = scale * rng.uniform(-bound, bound);
      }
      // biases stay zero
    }
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Per-layer activations of the forward pass, kept for backward.
  struct Cache {
    int batch = 0;
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = output
  };

  // Batched forward: in is [batch x input_dim] row-major, out [batch x output_dim].
  void forward_batch(const double* in, int batch, double* out, Cache* cache = nullptr) const {
    const int layers = num_layers();
    if (cache) {
      cache->batch = batch;
      cache->acts.resize(static_cast<std::size_t>(layers) + 1);
      cache->acts[0].assign(in, in + static_cast<std::size_t>(batch) * sizes_[0]);
    }
    scratch_a_.assign(in, in + static_cast<std::size_t>(batch) * sizes_[0]);
    for (int l = 0; l < layers; ++l) {
      const int fan_in = sizes_[static_cast<std::size_t>(l)];
      const int fan_out = sizes_[static_cast<std::size_t>(l) + 1];
      scratch_b_.resize(static_cast<std::size_t>(batch) * fan_out);
      gemm_nt(scratch_a_.data(), weights(l), scratch_b_.data(), batch, fan_out, fan_in);
      const double* b = biases(l);
      for (int r = 0; r < batch; ++r) {
        double* row = scratch_b_.data() + static_cast<std::size_t>(r) * fan_out;
        for (int j = 0; j < fan_out; ++j) row[j] += b[j];
      }
      apply_activation(l, scratch_b_);
      if (cache) cache->acts[static_cast<std::size_t>(l) + 1] = scratch_b_;
      scratch_a_.swap(scratch_b_);
    }
    std::copy(scratch_a_.begin(), scratch_a_.end(), out);
  }

  // Single-input convenience.
  void forward(std::span<const double> in, std::vector<double>& out) const {
    check_contract(static_cast<int>(in.size()) == input_dim(), "mlp: input size mismatch");
    out.resize(static_cast<std::size_t>(output_dim()));
    forward_batch(in.data(), 1, out.data());
  }

  // Backward from upstream dL/dout ([batch x output_dim]); accumulates
  // parameter gradients into `grad` (same layout as params, caller-zeroed or
  // reused across a batch loop) and optionally emits dL/dinput.
  void backward_batch(const Cache& cache, const double* dout, std::vector<double>& grad,
                      double* dinput = nullptr) const {
    check_contract(grad.size() == params_.size(), "mlp: gradient layout mismatch");
    const int layers = num_layers();
    const int batch = cache.batch;
    std::vector<double> delta(dout, dout + static_cast<std::size_t>(batch) * sizes_.back());

    for (int l = layers - 1; l >= 0; --l) {
      const int fan_in = sizes_[static_cast<std::size_t>(l)];
      const int fan_out = sizes_[static_cast<std::size_t>(l) + 1];
      const auto& y = cache.acts[static_cast<std::size_t>(l) + 1];
      // activation derivative through the post-activation values
      if (l == layers - 1) {
        if (output_ == OutputActivation::kTanh) {
          for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - y[i] * y[i];
        }
      } else {
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= y[i] > 0.0 ? 1.0 : 0.0;
      }
      // parameter gradients
      double* gw = grad.data() + offsets_[static_cast<std::size_t>(l)];
      double* gb = gw + static_cast<std::size_t>(fan_out) * fan_in;
      gemm_tn_acc(delta.data(), cache.acts[static_cast<std::size_t>(l)].data(), gw,
                  fan_out, fan_in, batch);
      for (int r = 0; r < batch; ++r) {
        const double* row = delta.data() + static_cast<std::size_t>(r) * fan_out;
        for (int j = 0; j < fan_out; ++j) gb[j] += row[j];
      }
      // propagate to previous layer (or to the input)
      if (l > 0 || dinput) {
        std::vector<double> prev(static_cast<std::size_t>(batch) * fan_in);
        gemm_nn(delta.data(), weights(l), prev.data(), batch, fan_in, fan_out);
        if (l == 0) {
          std::copy(prev.begin(), prev.end(), dinput);
        } else {
          delta.swap(prev);
        }
      }
    }
  }

  std::vector<double> zero_grad() const { return std::vector<double>(params_.size(), 0.0); }

  // Checkpoint format: a text header (sizes, output activation) followed by
  // one %.17g float per line, which round-trips binary64 exactly.
  void save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint '" + path.string() + "'");
    out << "mlp 1\n" << sizes_.size() << '\n';
    for (std::size_t i = 0; i < sizes_.size(); ++i) out << sizes_[i] << (i + 1 < sizes_.size() ? ' ' : '\n');
    out << (output_ == OutputActivation::kTanh ? "tanh" : "identity") << '\n';
    out << params_.size() << '\n';
    char buf[40];
    for (double p : params_) {
      std::snprintf(buf, sizeof buf, "%.17g\n", p);
      out << buf;
    }
  }

  static Mlp load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint '" + path.string() + "'");
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "mlp" || version != 1) throw ConfigError("bad checkpoint header in '" + path.string() + "'");
    std::size_t n_sizes = 0;
    in >> n_sizes;
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) in >> s;
    std::string act;
    in >> act;
    Mlp net(sizes, act == "tanh" ? OutputActivation::kTanh : OutputActivation::kIdentity, 0);
    std::size_t count = 0;
    in >> count;
    if (count != net.params_.size()) throw ConfigError("checkpoint parameter count mismatch");
    for (auto& p : net.params_) in >> p;
    if (!in) throw ConfigError("truncated checkpoint '" + path.string() + "'");
    return net;
  }

 private:
  double* weights(std::size_t l) { return params_.data() + offsets_[l]; }
  const double* weights(std::size_t l) const { return params_.data() + offsets_[l]; }
  double* biases(std::size_t l) {
    return weights(l) + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
  }
  const double* biases(std::size_t l) const {
    return weights(l) + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
  }

  void apply_activation(int layer, std::vector<double>& x) const {
    if (layer == num_layers() - 1) {
      if (output_ == OutputActivation::kTanh) {
        for (double& v : x) v = std::tanh(v);
      }
    } else {
      for (double& v : x) v = v > 0.0 ? v : 0.0;
    }
  }

  std::vector<int> sizes_;
  OutputActivation output_ = OutputActivation::kIdentity;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  mutable std::vector<double> scratch_a_, scratch_b_;
};

}  // namespace trajlab::nn
