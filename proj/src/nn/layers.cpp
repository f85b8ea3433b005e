#include "mot/nn/layers.hpp"

namespace mot::nn {

DenseLayer::DenseLayer(ParamStore& params, const std::string& name, int in,
                       int out, Activation act)
    : in_(in), out_(out), act_(act) {
  w_ = params.add(name + ".w", out, in);
  b_ = params.add(name + ".b", out, 1);
}

Tape::Id DenseLayer::apply(Tape& tape, Tape::Id x) const {
  const Tape::Id lin = tape.affine(w_, x, b_);
  switch (act_) {
    case Activation::kIdentity: return lin;
    case Activation::kRelu: return tape.relu(lin);
    case Activation::kTanh: return tape.tanh(lin);
  }
  return lin;
}

void DenseLayer::init_params(ParamStore& params, Rng& rng) const {
  init_uniform(params, w_, rng);
}

GruCell::GruCell(ParamStore& params, const std::string& name, int input_dim,
                 int hidden_dim)
    : input_(input_dim), hidden_(hidden_dim) {
  wz_ = params.add(name + ".wz", hidden_dim, input_dim);
  uz_ = params.add(name + ".uz", hidden_dim, hidden_dim);
  bz_ = params.add(name + ".bz", hidden_dim, 1);
  wr_ = params.add(name + ".wr", hidden_dim, input_dim);
  ur_ = params.add(name + ".ur", hidden_dim, hidden_dim);
  br_ = params.add(name + ".br", hidden_dim, 1);
  wc_ = params.add(name + ".wc", hidden_dim, input_dim);
  uc_ = params.add(name + ".uc", hidden_dim, hidden_dim);
  bc_ = params.add(name + ".bc", hidden_dim, 1);
}

Tape::Id GruCell::step(Tape& tape, Tape::Id h_prev, Tape::Id x) const {
  const Tape::Id z =
      tape.sigmoid(tape.add(tape.affine(wz_, x, bz_), tape.matvec(uz_, h_prev)));
  const Tape::Id r =
      tape.sigmoid(tape.add(tape.affine(wr_, x, br_), tape.matvec(ur_, h_prev)));
  const Tape::Id c = tape.tanh(tape.add(
      tape.affine(wc_, x, bc_), tape.matvec(uc_, tape.hadamard(r, h_prev))));
  return tape.add(tape.hadamard(tape.one_minus(z), h_prev),
                  tape.hadamard(z, c));
}

void GruCell::init_params(ParamStore& params, Rng& rng) const {
  for (int id : {wz_, uz_, wr_, ur_, wc_, uc_}) init_uniform(params, id, rng);
}

}  // namespace mot::nn
