#include "flexedge/nn.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace flexedge::nn {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

MlpParams MlpParams::init(const std::vector<int>& sizes, Rng& rng,
                          double last_layer_scale) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("MlpParams::init: need at least two sizes");
  }
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    if (in <= 0 || out <= 0) {
      throw std::invalid_argument("MlpParams::init: non-positive layer size");
    }
    const double limit = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) {
        w(r, c) = rng.uniform(-limit, limit);
      }
    }
    if (l + 2 == sizes.size()) {
      w *= last_layer_scale;
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim());
  for (const auto& w : weights) {
    sizes.push_back(static_cast<int>(w.rows()));
  }
  return sizes;
}

long MlpParams::parameter_count() const {
  long n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    g.weights.push_back(
        Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

double MlpGrads::squared_norm() const {
  double s = 0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

void MlpGrads::scale(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& x,
                        MlpTrace* trace) {
  if (x.rows() != params.input_dim()) {
    throw std::invalid_argument("forward: input has " +
                                std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(params.input_dim()));
  }
  const std::size_t layers = params.weights.size();
  if (trace) {
    trace->pre.assign(layers, {});
    trace->post.assign(layers + 1, {});
    trace->post[0] = x;
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (params.weights[l] * h).colwise() + params.biases[l];
    if (l + 1 < layers) {
      h = z.array().tanh();
    } else {
      h = z;
    }
    if (trace) {
      trace->pre[l] = std::move(z);
      trace->post[l + 1] = h;
    }
  }
  return h;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& x) {
  return forward(params, Eigen::MatrixXd(x), nullptr).col(0);
}

Eigen::MatrixXd backward(const MlpParams& params, const MlpTrace& trace,
                         const Eigen::MatrixXd& upstream, MlpGrads& grads) {
  const std::size_t layers = params.weights.size();
  if (upstream.rows() != params.output_dim() ||
      upstream.cols() != trace.post[0].cols()) {
    throw std::invalid_argument("backward: upstream shape mismatch");
  }
  Eigen::MatrixXd delta = upstream;  // dL/d(pre-activation of layer l)
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers) {
      // chain through tanh: post = tanh(pre)
      delta = delta.cwiseProduct(
          (1.0 - trace.post[l + 1].array().square()).matrix());
    }
    grads.weights[l].noalias() += delta * trace.post[l].transpose();
    grads.biases[l].noalias() += delta.rowwise().sum();
    if (l > 0) {
      delta = params.weights[l].transpose() * delta;
    } else {
      return params.weights[0].transpose() * delta;
    }
  }
  return upstream;  // zero-layer network cannot occur
}

PolicyParams init_policy(int obs_dim, int act_dim,
                         const std::vector<int>& hidden_sizes, Rng& rng,
                         double init_log_std) {
  std::vector<int> actor_sizes{obs_dim};
  actor_sizes.insert(actor_sizes.end(), hidden_sizes.begin(),
                     hidden_sizes.end());
  actor_sizes.push_back(act_dim);
  std::vector<int> critic_sizes{obs_dim};
  critic_sizes.insert(critic_sizes.end(), hidden_sizes.begin(),
                      hidden_sizes.end());
  critic_sizes.push_back(1);

  PolicyParams p;
  p.actor = MlpParams::init(actor_sizes, rng, 0.01);
  p.critic = MlpParams::init(critic_sizes, rng);
  p.log_std = Eigen::VectorXd::Constant(
      act_dim, std::clamp(init_log_std, kLogStdMin, kLogStdMax));
  sync_old_policy(p);
  return p;
}

void sync_old_policy(PolicyParams& params) {
  params.old_actor = params.actor;
  params.old_log_std = params.log_std;
}

double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std) {
  const Eigen::ArrayXd z =
      (action - mean).array() / log_std.array().exp();
  return (-0.5 * z.square() - log_std.array() - kHalfLog2Pi).sum();
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return (log_std.array() + 0.5 + kHalfLog2Pi).sum();
}

SampleResult policy_sample(const MlpParams& actor,
                           const Eigen::VectorXd& log_std,
                           const Eigen::VectorXd& obs, Rng& rng,
                           bool deterministic) {
  SampleResult r;
  const Eigen::VectorXd mean = forward(actor, obs).array().tanh();
  if (deterministic) {
    r.action = mean;
  } else {
    const Eigen::ArrayXd sigma = log_std.array().exp();
    Eigen::VectorXd noise(mean.size());
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      noise(i) = rng.gaussian();
    }
    r.action = (mean.array() + sigma * noise.array())
                   .cwiseMax(-1.0)
                   .cwiseMin(1.0);
  }
  r.log_prob = gaussian_log_prob(r.action, mean, log_std);
  return r;
}

PolicyEval policy_evaluate(const MlpParams& actor,
                           const Eigen::VectorXd& log_std,
                           const Eigen::MatrixXd& obs,
                           const Eigen::MatrixXd& actions) {
  PolicyEval ev;
  ev.mean = forward(actor, obs, &ev.trace).array().tanh();
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const Eigen::MatrixXd diff = actions - ev.mean;
  ev.log_prob =
      (-0.5 * (diff.array().square().colwise() * inv_var)).colwise().sum();
  ev.log_prob.array() -= log_std.sum() + kHalfLog2Pi * log_std.size();
  return ev;
}

void policy_backward(const MlpParams& actor, const Eigen::VectorXd& log_std,
                     const PolicyEval& eval, const Eigen::MatrixXd& actions,
                     const Eigen::VectorXd& dlog_prob, MlpGrads& actor_grads,
                     Eigen::VectorXd& dlog_std) {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const Eigen::MatrixXd diff = actions - eval.mean;
  // d log_prob / d mean = diff / sigma^2, then through the tanh squash
  Eigen::MatrixXd dmean =
      (diff.array().colwise() * inv_var).rowwise() *
      dlog_prob.transpose().array();
  Eigen::MatrixXd dz =
      dmean.array() * (1.0 - eval.mean.array().square());
  backward(actor, eval.trace, dz, actor_grads);
  // d log_prob / d log_std = z^2 - 1 per dimension
  dlog_std += ((diff.array().square().colwise() * inv_var) - 1.0)
                  .matrix() *
              dlog_prob;
}

void adam_step(MlpParams& params, Eigen::VectorXd* extra, MlpGrads& grads,
               Eigen::VectorXd* extra_grad, AdamState& state, double lr,
               double clip_norm) {
  if (state.t == 0) {
    state.m = MlpGrads::zeros_like(params);
    state.v = MlpGrads::zeros_like(params);
    if (extra) {
      state.m_extra = Eigen::VectorXd::Zero(extra->size());
      state.v_extra = Eigen::VectorXd::Zero(extra->size());
    }
  }
  double sq = grads.squared_norm();
  if (extra_grad) sq += extra_grad->squaredNorm();
  const double norm = std::sqrt(sq);
  if (clip_norm > 0 && norm > clip_norm) {
    const double s = clip_norm / norm;
    grads.scale(s);
    if (extra_grad) *extra_grad *= s;
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.t);
  const double bc2 = 1.0 - std::pow(state.beta2, state.t);
  const double step = lr * std::sqrt(bc2) / bc1;

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= step * m.array() / (v.array().sqrt() + state.eps);
  };

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l],
           state.v.weights[l]);
    update(params.biases[l], grads.biases[l], state.m.biases[l],
           state.v.biases[l]);
  }
  if (extra && extra_grad) {
    update(*extra, *extra_grad, state.m_extra, state.v_extra);
  }
}

namespace {

void write_mlp(std::ostream& os, const std::string& name,
               const MlpParams& p) {
  os << name << "_layers";
  for (int s : p.layer_sizes()) os << ' ' << s;
  os << '\n';
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    os << name << "_weight " << l << '\n';
    for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) {
        if (c) os << ' ';
        os << format_double(p.weights[l](r, c));
      }
      os << '\n';
    }
    os << name << "_bias " << l << '\n';
    for (Eigen::Index r = 0; r < p.biases[l].size(); ++r) {
      if (r) os << ' ';
      os << format_double(p.biases[l](r));
    }
    os << '\n';
  }
}

std::vector<int> read_sizes_line(std::istream& is, const std::string& tag) {
  std::string line;
  if (!std::getline(is, line)) {
    throw CheckpointError("checkpoint truncated before " + tag);
  }
  std::istringstream ss(line);
  std::string got;
  ss >> got;
  if (got != tag) {
    throw CheckpointError("checkpoint: expected " + tag + ", got " + got);
  }
  std::vector<int> sizes;
  int s;
  while (ss >> s) sizes.push_back(s);
  if (sizes.size() < 2) {
    throw CheckpointError("checkpoint: bad layer sizes for " + tag);
  }
  return sizes;
}

MlpParams read_mlp(std::istream& is, const std::string& name) {
  const auto sizes = read_sizes_line(is, name + "_layers");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::string tag;
    std::size_t idx;
    if (!(is >> tag >> idx) || tag != name + "_weight" || idx != l) {
      throw CheckpointError("checkpoint: bad weight header for " + name);
    }
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (!(is >> w(r, c))) {
          throw CheckpointError("checkpoint: truncated weights for " + name);
        }
      }
    }
    if (!(is >> tag >> idx) || tag != name + "_bias" || idx != l) {
      throw CheckpointError("checkpoint: bad bias header for " + name);
    }
    Eigen::VectorXd b(sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      if (!(is >> b(r))) {
        throw CheckpointError("checkpoint: truncated biases for " + name);
      }
    }
    is.ignore(1, '\n');
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     std::uint64_t config_digest) {
  std::ofstream os(path);
  if (!os) {
    throw CheckpointError("cannot write checkpoint: " + path);
  }
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016" PRIx64 , config_digest);
  os << "flexedge_checkpoint 1\n";
  os << "config_digest " << digest << '\n';
  os << "log_std";
  for (Eigen::Index i = 0; i < params.log_std.size(); ++i) {
    os << ' ' << format_double(params.log_std(i));
  }
  os << '\n';
  write_mlp(os, "actor", params.actor);
  write_mlp(os, "critic", params.critic);
  if (!os) {
    throw CheckpointError("write failed: " + path);
  }
}

PolicyParams load_checkpoint(const std::string& path,
                             std::uint64_t* config_digest) {
  std::ifstream is(path);
  if (!is) {
    throw CheckpointError("cannot read checkpoint: " + path);
  }
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "flexedge_checkpoint" ||
      version != 1) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  std::string tag, digest_hex;
  if (!(is >> tag >> digest_hex) || tag != "config_digest") {
    throw CheckpointError("checkpoint: missing config digest");
  }
  if (config_digest) {
    *config_digest = std::stoull(digest_hex, nullptr, 16);
  }
  is.ignore(1, '\n');

  std::string line;
  if (!std::getline(is, line) || line.rfind("log_std", 0) != 0) {
    throw CheckpointError("checkpoint: missing log_std");
  }
  std::istringstream ss(line.substr(7));
  std::vector<double> vals;
  double x;
  while (ss >> x) vals.push_back(x);
  if (vals.empty()) {
    throw CheckpointError("checkpoint: empty log_std");
  }

  PolicyParams p;
  p.log_std = Eigen::Map<Eigen::VectorXd>(vals.data(),
                                          static_cast<Eigen::Index>(vals.size()));
  p.actor = read_mlp(is, "actor");
  p.critic = read_mlp(is, "critic");
  if (p.actor.output_dim() != p.log_std.size()) {
    throw CheckpointError("checkpoint: log_std / actor dimension mismatch");
  }
  sync_old_policy(p);
  return p;
}

}  // namespace flexedge::nn
