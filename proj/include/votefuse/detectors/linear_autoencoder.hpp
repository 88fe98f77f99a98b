#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "votefuse/detectors/types.hpp"
#include "votefuse/random.hpp"

namespace votefuse::detectors::linear_autoencoder {

// Windowed linear encoder/decoder:
//   z = E x + b_e,  x_hat = D z + b_d
// trained with Adam on mean squared reconstruction error over mini-batches. The last tenth
// of the training windows (chronologically) is held out to drive early stopping.

struct Weights {
  Eigen::MatrixXd encoder;  // latent x d
  Eigen::VectorXd encoder_bias;
  Eigen::MatrixXd decoder;  // d x latent
  Eigen::VectorXd decoder_bias;
};

inline Eigen::MatrixXd forward(const Weights& w, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = (w.encoder * x).colwise() + w.encoder_bias;
  return (w.decoder * z).colwise() + w.decoder_bias;
}

inline double mse(const Weights& w, const Eigen::MatrixXd& x) {
  if (x.cols() == 0) return 0.0;
  return (forward(w, x) - x).squaredNorm() / static_cast<double>(x.size());
}

namespace detail {

struct AdamSlot {
  Eigen::MatrixXd m, v;
  explicit AdamSlot(const Eigen::MatrixXd& like)
      : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())), v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

  template <typename Param>
  void step(Param& p, const Eigen::MatrixXd& g, double lr, long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    p -= (lr * (m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix();
  }
};

inline Eigen::MatrixXd init_uniform(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = rng.uniform(-bound, bound);
  return out;
}

}  // namespace detail

inline Parameters to_parameters(const Weights& w) {
  return {{"encoder", to_block(w.encoder)},
          {"encoder_bias", to_block(w.encoder_bias)},
          {"decoder", to_block(w.decoder)},
          {"decoder_bias", to_block(w.decoder_bias)}};
}

inline Weights from_parameters(const Parameters& p) {
  return {as_matrix(require(p, "encoder")), as_vector(require(p, "encoder_bias")),
          as_matrix(require(p, "decoder")), as_vector(require(p, "decoder_bias"))};
}

inline void fit(const DetectorSpec& spec, const TimeSeries& train, Parameters& params, LossHistory& history) {
  const auto& h = spec.hyper;
  const auto window = static_cast<std::size_t>(h.window);
  const Eigen::MatrixXd all = window_matrix(train, window);
  const auto n = static_cast<std::size_t>(all.cols());
  const auto d = all.rows();
  const auto latent = static_cast<Eigen::Index>(h.latent);

  std::size_t n_val = n >= 20 ? std::max<std::size_t>(1, n / 10) : 0;
  const std::size_t n_fit = n - n_val;
  const Eigen::MatrixXd fit_x = all.leftCols(static_cast<Eigen::Index>(n_fit));
  const Eigen::MatrixXd val_x = n_val ? Eigen::MatrixXd(all.rightCols(static_cast<Eigen::Index>(n_val))) : fit_x;

  Rng rng(spec.seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(d + latent));
  Weights w{detail::init_uniform(latent, d, bound, rng), Eigen::VectorXd::Zero(latent),
            detail::init_uniform(d, latent, bound, rng), Eigen::VectorXd::Zero(d)};

  detail::AdamSlot s_enc(w.encoder), s_enc_b(w.encoder_bias), s_dec(w.decoder), s_dec_b(w.decoder_bias);
  std::vector<std::size_t> order(n_fit);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(h.batch_size);

  Weights best = w;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;
  history = {};

  for (int epoch = 1; epoch <= h.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n_fit; start += batch) {
      const auto count = std::min(batch, n_fit - start);
      Eigen::MatrixXd xb(d, static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i)
        xb.col(static_cast<Eigen::Index>(i)) = fit_x.col(static_cast<Eigen::Index>(order[start + i]));
      const Eigen::MatrixXd z = (w.encoder * xb).colwise() + w.encoder_bias;
      const Eigen::MatrixXd out = (w.decoder * z).colwise() + w.decoder_bias;
      const Eigen::MatrixXd g_out = (out - xb) * (2.0 / static_cast<double>(xb.size()));
      const Eigen::MatrixXd g_dec = g_out * z.transpose();
      const Eigen::VectorXd g_dec_b = g_out.rowwise().sum();
      const Eigen::MatrixXd g_z = w.decoder.transpose() * g_out;
      const Eigen::MatrixXd g_enc = g_z * xb.transpose();
      const Eigen::VectorXd g_enc_b = g_z.rowwise().sum();
      ++step;
      s_enc.step(w.encoder, g_enc, h.learning_rate, step);
      s_enc_b.step(w.encoder_bias, g_enc_b, h.learning_rate, step);
      s_dec.step(w.decoder, g_dec, h.learning_rate, step);
      s_dec_b.step(w.decoder_bias, g_dec_b, h.learning_rate, step);
    }
    const double train_loss = mse(w, fit_x);
    const double val_loss = mse(w, val_x);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw DataError("detector '" + spec.name + "': non-finite loss at epoch " + std::to_string(epoch));
    history.train.push_back(train_loss);
    history.validation.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = w;
      history.best_epoch = static_cast<std::size_t>(epoch);
      since_best = 0;
    } else if (++since_best >= h.patience) {
      break;
    }
  }
  params = to_parameters(best);
}

inline Reconstruction reconstruct(const DetectorSpec& spec, const Parameters& params, const TimeSeries& series) {
  const auto window = static_cast<std::size_t>(spec.hyper.window);
  const auto m = static_cast<Eigen::Index>(series.cols());
  const Weights w = from_parameters(params);
  const Eigen::MatrixXd x = window_matrix(series, window);
  if (x.cols() == 0) return {window - 1, Eigen::MatrixXd(m, 0)};
  const Eigen::MatrixXd out = forward(w, x);
  return {window - 1, out.bottomRows(m)};
}

}  // namespace votefuse::detectors::linear_autoencoder
