#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "gapfill/error.hpp"
#include "gapfill/nn/model.hpp"

namespace gapfill::nn {

/// Checkpoint schema: format version, cell kind, shape, hyperparameters, and
/// every named parameter as a flat row-major array. Numbers are emitted in
/// round-trip-exact decimal form, so load(save(m)) is value-exact.
inline nlohmann::json checkpoint_to_json(const ModelParams& model) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["cell_kind"] = cell_kind_name(model.kind);
    j["shape"] = {{"input_dim", model.shape.input_dim}, {"hidden", model.shape.hidden},
                  {"layers", ShapeSpec::layers}};
    j["hyperparameters"] = {{"time_gate_leak", model.fwd_gate[0].leak}};
    nlohmann::json params = nlohmann::json::object();
    auto& mut = const_cast<ModelParams&>(model);
    for (const auto& ref : all_params(mut)) {
        nlohmann::json arr = nlohmann::json::array();
        for (double v : ref.mat->a) arr.push_back(v);
        params[ref.name] = std::move(arr);
    }
    j["parameters"] = std::move(params);
    return j;
}

inline ModelParams checkpoint_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
        throw data_error("checkpoint: unsupported format version");
    ShapeSpec shape;
    shape.input_dim = j.at("shape").at("input_dim").get<std::size_t>();
    shape.hidden = j.at("shape").at("hidden").get<std::size_t>();
    const CellKind kind = cell_kind_from_name(j.at("cell_kind").get<std::string>());

    ModelParams m = init_params(shape, kind, 0);
    if (j.contains("hyperparameters") && j["hyperparameters"].contains("time_gate_leak")) {
        const double leak = j["hyperparameters"]["time_gate_leak"].get<double>();
        for (auto* g : {&m.fwd_gate, &m.bwd_gate})
            for (auto& tg : *g) tg.leak = leak;
    }
    const auto& params = j.at("parameters");
    std::size_t consumed = 0;
    for (const auto& ref : all_params(m)) {
        if (!params.contains(ref.name)) throw data_error("checkpoint: missing parameter " + ref.name);
        const auto& arr = params.at(ref.name);
        if (arr.size() != ref.mat->size())
            throw data_error("checkpoint: size mismatch for " + ref.name);
        for (std::size_t i = 0; i < ref.mat->size(); ++i) ref.mat->a[i] = arr[i].get<double>();
        ++consumed;
    }
    if (consumed != params.size()) throw data_error("checkpoint: unexpected extra parameters");
    return m;
}

inline void save_checkpoint(const ModelParams& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write checkpoint: " + path);
    out << checkpoint_to_json(model).dump(2) << "\n";
    if (!out) throw data_error("write failed: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("checkpoint parse error: " + std::string(e.what()));
    }
    return checkpoint_from_json(j);
}

} // namespace gapfill::nn
