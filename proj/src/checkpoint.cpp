#include "dynalay/checkpoint.hpp"

#include <fstream>

#include "dynalay/config.hpp"
#include "dynalay/error.hpp"

namespace dynalay {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw FormatError("checkpoint: " + where + ": " + what);
}

const json& at(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(where, std::string("missing key '") + key + "'");
    return *it;
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) bad(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

Vector vec(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array");
    Vector v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

DenseMatrix matrix(const json& j, const std::string& where) {
    const std::size_t rows = count(at(j, "rows", where), where + ".rows");
    const std::size_t cols = count(at(j, "cols", where), where + ".cols");
    Vector data = vec(at(j, "data", where), where + ".data");
    try {
        return DenseMatrix(rows, cols, std::move(data));
    } catch (const InputError& e) {
        bad(where, e.what());
    }
}

Activation activation(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected an activation name");
    try {
        return parse_activation(j.get<std::string>());
    } catch (const InputError& e) {
        bad(where, e.what());
    }
}

json dense_to_json(const DenseLayer& l) {
    return json{{"w", to_json(l.w)}, {"b", l.b}, {"activation", std::string(to_string(l.act))}};
}

DenseLayer dense(const json& j, const std::string& where) {
    DenseLayer l{matrix(at(j, "w", where), where + ".w"), vec(at(j, "b", where), where + ".b"),
                 activation(at(j, "activation", where), where + ".activation")};
    if (l.b.size() != l.w.rows()) bad(where, "bias length does not match weight rows");
    return l;
}

} // namespace

json to_json(const DenseMatrix& m) { return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

json to_json(const MainModel& model) {
    json layers = json::array();
    for (const FpiLayer& l : model.fpi_layers)
        layers.push_back(json{{"w_z", to_json(l.w_z())},
                              {"w_x", to_json(l.w_x())},
                              {"b", l.b()},
                              {"activation", std::string(to_string(l.activation()))},
                              {"contraction_target", l.contraction_target()}});
    return json{{"encoder", dense_to_json(model.encoder)}, {"fpi_layers", layers}, {"head", dense_to_json(model.head)}};
}

json to_json(const AgentNet& agent) {
    return json{{"hidden", dense_to_json(agent.hidden)},
                {"output", dense_to_json(agent.output)},
                {"epsilon", agent.epsilon},
                {"temperature", agent.temperature}};
}

json to_json(const Checkpoint& c) {
    return json{{"config", to_json(c.config)},
                {"epoch", c.epoch},
                {"main", to_json(c.main)},
                {"agent", to_json(c.agent)},
                {"rng_digest", c.rng_digest}};
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint c;
    try {
        c.config = train_config_from_json(at(j, "config", "$"));
    } catch (const InputError& e) {
        bad("$.config", e.what());
    }
    const json& epoch = at(j, "epoch", "$");
    if (!epoch.is_number_integer()) bad("$.epoch", "expected an integer");
    c.epoch = epoch.get<int>();

    const json& main = at(j, "main", "$");
    c.main.encoder = dense(at(main, "encoder", "$.main"), "$.main.encoder");
    c.main.head = dense(at(main, "head", "$.main"), "$.main.head");
    const json& layers = at(main, "fpi_layers", "$.main");
    if (!layers.is_array()) bad("$.main.fpi_layers", "expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string w = "$.main.fpi_layers[" + std::to_string(i) + "]";
        const json& l = layers[i];
        try {
            c.main.fpi_layers.emplace_back(matrix(at(l, "w_z", w), w + ".w_z"), matrix(at(l, "w_x", w), w + ".w_x"),
                                           vec(at(l, "b", w), w + ".b"), activation(at(l, "activation", w), w),
                                           num(at(l, "contraction_target", w), w + ".contraction_target"));
        } catch (const InputError& e) {
            bad(w, e.what());
        }
        const FpiLayer& got = c.main.fpi_layers.back();
        if (!got.is_certified()) bad(w, "state map is not a certified contraction");
        if (got.state_dim() != c.main.state_dim() || got.input_dim() != c.main.state_dim())
            bad(w, "dimensions do not match the encoder");
    }
    if (c.main.head.input_dim() != c.main.state_dim()) bad("$.main.head", "input does not match the encoder");

    const json& agent = at(j, "agent", "$");
    c.agent.hidden = dense(at(agent, "hidden", "$.agent"), "$.agent.hidden");
    c.agent.output = dense(at(agent, "output", "$.agent"), "$.agent.output");
    c.agent.epsilon = num(at(agent, "epsilon", "$.agent"), "$.agent.epsilon");
    c.agent.temperature = num(at(agent, "temperature", "$.agent"), "$.agent.temperature");
    if (c.agent.n_actions() != c.main.fpi_layers.size() + 1) bad("$.agent.output", "needs one logit per action");
    if (c.agent.output.input_dim() != c.agent.hidden.output_dim()) bad("$.agent.output", "shape mismatch");

    const json& digest = at(j, "rng_digest", "$");
    if (!digest.is_string()) bad("$.rng_digest", "expected a string");
    c.rng_digest = digest.get<std::string>();
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string() + " for writing");
    os << to_json(ckpt).dump(1) << '\n';
    if (!os) throw InputError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

} // namespace dynalay
