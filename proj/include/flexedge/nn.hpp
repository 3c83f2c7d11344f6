#pragma once

// Small fully connected networks with analytic gradients, a diagonal
// Gaussian policy head with a squashed mean, and an Adam optimizer. Batched
// variants hold samples in columns.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "flexedge/rng.hpp"

namespace flexedge::nn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Feed-forward parameters: tanh hidden layers, linear output.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

  static MlpParams init(const std::vector<int>& sizes, Rng& rng,
                        double last_layer_scale = 1.0);

  std::vector<int> layer_sizes() const;
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  long parameter_count() const;
};

/// Per-layer activations recorded by a forward pass; `post[0]` is the input.
struct MlpTrace {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const MlpParams& params);
  void set_zero();
  double squared_norm() const;
  void scale(double s);
};

// Batched forward pass (columns are samples). Pass a trace to enable a
// subsequent backward pass.
Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& x,
                        MlpTrace* trace = nullptr);
Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& x);

// Exact gradients of a scalar loss given dL/d(output). Returns dL/d(input).
Eigen::MatrixXd backward(const MlpParams& params, const MlpTrace& trace,
                         const Eigen::MatrixXd& upstream, MlpGrads& grads);

/// Actor-critic parameter set. The old actor is a frozen copy used as the
/// reference policy between synchronizations.
struct PolicyParams {
  MlpParams actor;
  Eigen::VectorXd log_std;  // per action dimension, kept in [-5, 2]
  MlpParams critic;
  MlpParams old_actor;
  Eigen::VectorXd old_log_std;
};

PolicyParams init_policy(int obs_dim, int act_dim,
                         const std::vector<int>& hidden_sizes, Rng& rng,
                         double init_log_std);

// Copies the live actor over the frozen reference.
void sync_old_policy(PolicyParams& params);

struct SampleResult {
  Eigen::VectorXd action;  // in [-1, 1]
  double log_prob = 0.0;
};

// Draws an action from N(tanh(actor(obs)), diag(exp(log_std)^2)), clamped to
// [-1, 1]. The recorded log-probability is the Gaussian density (no squash
// correction) evaluated at the returned action.
SampleResult policy_sample(const MlpParams& actor,
                           const Eigen::VectorXd& log_std,
                           const Eigen::VectorXd& obs, Rng& rng,
                           bool deterministic = false);

double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);

// Entropy of the diagonal Gaussian; independent of the mean.
double gaussian_entropy(const Eigen::VectorXd& log_std);

/// Batched policy evaluation for optimization: log-probabilities of stored
/// actions under the current parameters, with the trace kept for backward.
struct PolicyEval {
  Eigen::MatrixXd mean;  // act_dim x batch, squashed
  Eigen::VectorXd log_prob;
  MlpTrace trace;
};

PolicyEval policy_evaluate(const MlpParams& actor,
                           const Eigen::VectorXd& log_std,
                           const Eigen::MatrixXd& obs,
                           const Eigen::MatrixXd& actions);

// Backpropagates dL/dlog_prob (one entry per sample) into actor parameter
// gradients and the log-std gradient. Gradients are accumulated.
void policy_backward(const MlpParams& actor, const Eigen::VectorXd& log_std,
                     const PolicyEval& eval, const Eigen::MatrixXd& actions,
                     const Eigen::VectorXd& dlog_prob, MlpGrads& actor_grads,
                     Eigen::VectorXd& dlog_std);

/// Adam with global gradient-norm clipping.
struct AdamState {
  MlpGrads m, v;
  Eigen::VectorXd m_extra, v_extra;  // optional extra vector (log-std)
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// `extra`/`extra_grad` may be null when the parameter set has no log-std.
void adam_step(MlpParams& params, Eigen::VectorXd* extra, MlpGrads& grads,
               Eigen::VectorXd* extra_grad, AdamState& state, double lr,
               double clip_norm);

/// Thrown on malformed or mismatched checkpoint files.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text checkpoint: layer sizes, scenario-config digest, and full-precision
// parameter arrays. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const PolicyParams& params,
                     std::uint64_t config_digest);
PolicyParams load_checkpoint(const std::string& path,
                             std::uint64_t* config_digest = nullptr);

}  // namespace flexedge::nn
