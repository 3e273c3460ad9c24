#include "glmsnn/checkpoint.hpp"

#include <fstream>

#include "glmsnn/error.hpp"

namespace glmsnn {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw FormatError("checkpoint matrix has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError("checkpoint matrix has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw FormatError("checkpoint vector has wrong length");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index k = 0; k < size; ++k) v(k) = j[static_cast<std::size_t>(k)].get<double>();
  return v;
}

json dims_to_json(const ModelDims& d) {
  return {{"n_inputs", d.n_inputs},   {"n_outputs", d.n_outputs}, {"horizon", d.horizon},
          {"syn_window", d.syn_window}, {"fb_window", d.fb_window}, {"syn_basis", d.syn_basis},
          {"fb_basis", d.fb_basis}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.n_inputs = j.at("n_inputs").get<int>();
  d.n_outputs = j.at("n_outputs").get<int>();
  d.horizon = j.at("horizon").get<int>();
  d.syn_window = j.at("syn_window").get<int>();
  d.fb_window = j.at("fb_window").get<int>();
  d.syn_basis = j.at("syn_basis").get<int>();
  d.fb_basis = j.at("fb_basis").get<int>();
  return d;
}

json basis_block(const BasisSpec& spec, const Eigen::MatrixXd& m) {
  json out = basis_spec_to_json(spec);
  if (spec.kind == BasisKind::kExplicit) out["matrix"] = matrix_to_json(m);
  return out;
}

Eigen::MatrixXd basis_matrix_from_block(const json& j, const BasisSpec& spec) {
  if (spec.kind == BasisKind::kExplicit) return matrix_from_json(j.at("matrix"), spec.window, spec.count);
  return build_basis(spec);
}

}  // namespace

json basis_spec_to_json(const BasisSpec& spec) {
  json out = {{"kind", to_string(spec.kind)}, {"count", spec.count}, {"window", spec.window}};
  if (spec.kind == BasisKind::kRaisedCosine) {
    out["log_stretch"] = spec.cosine.log_stretch;
    out["offset"] = spec.cosine.offset;
    out["first_center_lag"] = spec.cosine.first_center_lag;
    out["last_center_lag"] = spec.cosine.last_center_lag;
  }
  return out;
}

BasisSpec basis_spec_from_json(const json& j) {
  BasisSpec spec;
  spec.kind = basis_kind_from_string(j.at("kind").get<std::string>());
  spec.count = j.at("count").get<int>();
  spec.window = j.at("window").get<int>();
  if (spec.kind == BasisKind::kRaisedCosine) {
    spec.cosine.log_stretch = j.value("log_stretch", spec.cosine.log_stretch);
    spec.cosine.offset = j.value("offset", spec.cosine.offset);
    spec.cosine.first_center_lag = j.value("first_center_lag", spec.cosine.first_center_lag);
    spec.cosine.last_center_lag = j.value("last_center_lag", spec.cosine.last_center_lag);
  }
  return spec;
}

json model_to_json(const ModelParams& params) {
  json neurons = json::array();
  for (const NeuronParams& n : params.neurons) {
    neurons.push_back({{"weights", matrix_to_json(n.weights)},
                       {"feedback", vector_to_json(n.feedback)},
                       {"bias", n.bias}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"dims", dims_to_json(params.dims)},
          {"basis",
           {{"synaptic", basis_block(params.basis.synaptic_spec, params.basis.synaptic)},
            {"feedback", basis_block(params.basis.feedback_spec, params.basis.feedback)}}},
          {"neurons", std::move(neurons)}};
}

ModelParams model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("not a glmsnn checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    ModelParams p;
    p.dims = dims_from_json(j.at("dims"));
    p.dims.validate();
    const json& basis = j.at("basis");
    p.basis.synaptic_spec = basis_spec_from_json(basis.at("synaptic"));
    p.basis.feedback_spec = basis_spec_from_json(basis.at("feedback"));
    p.basis.synaptic = basis_matrix_from_block(basis.at("synaptic"), p.basis.synaptic_spec);
    p.basis.feedback = basis_matrix_from_block(basis.at("feedback"), p.basis.feedback_spec);

    const json& neurons = j.at("neurons");
    if (!neurons.is_array() || static_cast<int>(neurons.size()) != p.dims.n_outputs) {
      throw FormatError("checkpoint neuron count disagrees with dims");
    }
    for (const json& n : neurons) {
      NeuronParams np;
      np.weights = matrix_from_json(n.at("weights"), p.dims.n_inputs, p.dims.syn_basis);
      np.feedback = vector_from_json(n.at("feedback"), p.dims.fb_basis);
      np.bias = n.at("bias").get<double>();
      p.neurons.push_back(std::move(np));
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << model_to_json(params).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace glmsnn
