#pragma once

#include <string>

#include "mot/nn/params.hpp"
#include "mot/nn/tape.hpp"

namespace mot::nn {

enum class Activation { kIdentity, kRelu, kTanh };

// Fully connected layer; parameters live in the shared ParamStore.
class DenseLayer {
 public:
  DenseLayer(ParamStore& params, const std::string& name, int in, int out,
             Activation act);

  Tape::Id apply(Tape& tape, Tape::Id x) const;
  void init_params(ParamStore& params, Rng& rng) const;

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  int w_ = -1, b_ = -1;
  int in_ = 0, out_ = 0;
  Activation act_ = Activation::kIdentity;
};

// Gated recurrent unit:
//   z = sigmoid(W_z x + U_z h + b_z)
//   r = sigmoid(W_r x + U_r h + b_r)
//   c = tanh(W_c x + U_c (r . h) + b_c)
//   h' = (1 - z) . h + z . c
class GruCell {
 public:
  GruCell(ParamStore& params, const std::string& name, int input_dim,
          int hidden_dim);

  Tape::Id step(Tape& tape, Tape::Id h_prev, Tape::Id x) const;
  void init_params(ParamStore& params, Rng& rng) const;

  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }

 private:
  int input_ = 0, hidden_ = 0;
  int wz_, uz_, bz_;
  int wr_, ur_, br_;
  int wc_, uc_, bc_;
};

}  // namespace mot::nn
