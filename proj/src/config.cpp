#include "dynalay/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dynalay/error.hpp"

namespace dynalay {

using nlohmann::json;

namespace {

// Reads known keys out of one JSON object and rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw InputError("config: '" + where_ + "' must be a JSON object");
    }

    void get(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }
    void get(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            out = v->get<int>();
        }
    }
    void get(const char* key, std::size_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "a non-negative integer");
            out = v->get<std::size_t>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
        }
    }
    template <class T>
    void get(const char* key, std::vector<T>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(key, "an array");
            out.clear();
            for (const json& e : *v) {
                if (!e.is_number()) fail(key, "an array of numbers");
                if constexpr (std::is_integral_v<T>) {
                    if (!e.is_number_unsigned()) fail(key, "an array of non-negative integers");
                }
                out.push_back(e.get<T>());
            }
        }
    }
    const json* sub(const char* key) { return find(key); }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.contains(item.key()))
                throw InputError("config: unknown key '" + item.key() + "' in '" + where_ + "'");
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[noreturn]] void fail(const char* key, const char* what) const {
        throw InputError("config: '" + where_ + "." + key + "' must be " + what);
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw InputError(std::string("config: unknown ") + what + " '" + s + "'");
}

} // namespace

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }
std::string to_string(AgentReturn r) { return r == AgentReturn::Reward ? "reward" : "neg_total_loss"; }
std::string to_string(Z0Policy p) { return p == Z0Policy::CopyInput ? "copy_input" : "zeros"; }

json to_json(const TrainConfig& c) {
    return json{
        {"learning_rate", c.learning_rate},
        {"agent_learning_rate", c.agent_learning_rate},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs},
        {"warmup_epochs", c.warmup_epochs},
        {"max_steps_per_episode", c.max_steps_per_episode},
        {"seed", c.seed},
        {"optimizer", to_string(c.optimizer)},
        {"agent_return", to_string(c.agent_return)},
        {"baseline_decay", c.baseline_decay},
        {"eval_every", c.eval_every},
        {"fpi",
         {{"max_iter", c.fpi.max_iter},
          {"forward_tol", c.fpi.forward_tol},
          {"backward_tol", c.fpi.backward_tol},
          {"z0_policy", to_string(c.fpi.z0_policy)}}},
        {"reward",
         {{"alpha", c.reward.alpha}, {"beta", c.reward.beta_cost}, {"gamma", c.reward.gamma}, {"lambda", c.reward.lambda}}},
        {"model",
         {{"state_dim", c.model.state_dim},
          {"n_fpi_layers", c.model.n_fpi_layers},
          {"activation", std::string(to_string(c.model.fpi_activation))},
          {"contraction_target", c.model.contraction_target},
          {"agent_hidden", c.model.agent_hidden},
          {"epsilon", c.model.epsilon},
          {"temperature", c.model.temperature}}},
    };
}

namespace {

void read_train_fields(Fields& f, TrainConfig& c) {
    f.get("learning_rate", c.learning_rate);
    f.get("agent_learning_rate", c.agent_learning_rate);
    f.get("batch_size", c.batch_size);
    f.get("epochs", c.epochs);
    f.get("warmup_epochs", c.warmup_epochs);
    f.get("max_steps_per_episode", c.max_steps_per_episode);
    f.get("seed", c.seed);
    f.get("baseline_decay", c.baseline_decay);
    f.get("eval_every", c.eval_every);

    std::string s = to_string(c.optimizer);
    f.get("optimizer", s);
    c.optimizer = parse_enum<OptimizerKind>(s, {{"sgd", OptimizerKind::Sgd}, {"adam", OptimizerKind::Adam}}, "optimizer");
    s = to_string(c.agent_return);
    f.get("agent_return", s);
    c.agent_return = parse_enum<AgentReturn>(
        s, {{"reward", AgentReturn::Reward}, {"neg_total_loss", AgentReturn::NegTotalLoss}}, "agent_return");

    if (const json* j = f.sub("fpi")) {
        Fields g(*j, "fpi");
        g.get("max_iter", c.fpi.max_iter);
        g.get("forward_tol", c.fpi.forward_tol);
        g.get("backward_tol", c.fpi.backward_tol);
        std::string z0 = to_string(c.fpi.z0_policy);
        g.get("z0_policy", z0);
        c.fpi.z0_policy =
            parse_enum<Z0Policy>(z0, {{"zeros", Z0Policy::Zeros}, {"copy_input", Z0Policy::CopyInput}}, "z0_policy");
        g.finish();
    }
    if (const json* j = f.sub("reward")) {
        Fields g(*j, "reward");
        g.get("alpha", c.reward.alpha);
        g.get("beta", c.reward.beta_cost);
        g.get("gamma", c.reward.gamma);
        g.get("lambda", c.reward.lambda);
        g.finish();
    }
    if (const json* j = f.sub("model")) {
        Fields g(*j, "model");
        g.get("state_dim", c.model.state_dim);
        g.get("n_fpi_layers", c.model.n_fpi_layers);
        std::string act(to_string(c.model.fpi_activation));
        g.get("activation", act);
        try {
            c.model.fpi_activation = parse_activation(act);
        } catch (const InputError& e) {
            throw InputError(std::string("config: ") + e.what());
        }
        g.get("contraction_target", c.model.contraction_target);
        g.get("agent_hidden", c.model.agent_hidden);
        g.get("epsilon", c.model.epsilon);
        g.get("temperature", c.model.temperature);
        g.finish();
    }
}

} // namespace

TrainConfig train_config_from_json(const json& j, const TrainConfig& base) {
    TrainConfig c = base;
    Fields f(j, "config");
    read_train_fields(f, c);
    f.finish();
    c.validate();
    return c;
}

json to_json(const DataSpec& d) {
    json j{{"kind", d.kind},         {"n", d.n},
           {"test_n", d.test_n},     {"noise", d.noise},
           {"margin_easy", d.margin_easy}, {"margin_hard", d.margin_hard},
           {"hard_fraction", d.hard_fraction}, {"stripe_width", d.stripe_width},
           {"seed", d.seed}};
    if (!d.train_csv.empty()) j["train_csv"] = d.train_csv;
    if (!d.test_csv.empty()) j["test_csv"] = d.test_csv;
    return j;
}

DataSpec data_spec_from_json(const json& j, const DataSpec& base) {
    DataSpec d = base;
    Fields f(j, "data");
    f.get("kind", d.kind);
    f.get("n", d.n);
    f.get("test_n", d.test_n);
    f.get("noise", d.noise);
    f.get("margin_easy", d.margin_easy);
    f.get("margin_hard", d.margin_hard);
    f.get("hard_fraction", d.hard_fraction);
    f.get("stripe_width", d.stripe_width);
    f.get("seed", d.seed);
    f.get("train_csv", d.train_csv);
    f.get("test_csv", d.test_csv);
    f.finish();
    if (d.kind != "two_moons" && d.kind != "hard_easy" && d.kind != "csv")
        throw InputError("config: unknown data kind '" + d.kind + "'");
    if (d.kind == "csv" && d.train_csv.empty()) throw InputError("config: data kind 'csv' needs 'train_csv'");
    return d;
}

DataSplit load_data(const DataSpec& spec) {
    const std::uint64_t test_seed = spec.seed ^ 0x7e57'7e57'7e57ULL;
    try {
        if (spec.kind == "two_moons")
            return {gen_two_moons(spec.n, spec.noise, spec.seed), gen_two_moons(spec.test_n, spec.noise, test_seed)};
        if (spec.kind == "hard_easy")
            return {gen_hard_easy_mixture(spec.n, spec.margin_easy, spec.margin_hard, spec.seed, spec.hard_fraction,
                                          spec.stripe_width),
                    gen_hard_easy_mixture(spec.test_n, spec.margin_easy, spec.margin_hard, test_seed,
                                          spec.hard_fraction, spec.stripe_width)};
    } catch (const InputError& e) {
        throw InputError(std::string("config: data: ") + e.what());
    }
    if (spec.kind == "csv") {
        Dataset train = read_dataset_csv(spec.train_csv);
        Dataset test = spec.test_csv.empty() ? train : read_dataset_csv(spec.test_csv);
        return {std::move(train), std::move(test)};
    }
    throw InputError("config: unknown data kind '" + spec.kind + "'");
}

json to_json(const RunConfig& c) {
    json j = to_json(c.train);
    j["data"] = to_json(c.data);
    if (!c.preset.name.empty() || !c.preset.seeds.empty() || !c.preset.lambdas.empty()) {
        json p = json::object();
        if (!c.preset.name.empty()) p["name"] = c.preset.name;
        if (!c.preset.seeds.empty()) p["seeds"] = c.preset.seeds;
        if (!c.preset.lambdas.empty()) p["lambdas"] = c.preset.lambdas;
        j["preset"] = p;
    }
    return j;
}

RunConfig run_config_from_json(const json& j, const RunConfig& base) {
    RunConfig c = base;
    Fields f(j, "config");
    read_train_fields(f, c.train);
    if (const json* d = f.sub("data")) c.data = data_spec_from_json(*d, base.data);
    if (const json* p = f.sub("preset")) {
        Fields g(*p, "preset");
        g.get("name", c.preset.name);
        g.get("seeds", c.preset.seeds);
        g.get("lambdas", c.preset.lambdas);
        g.finish();
    }
    f.finish();
    c.train.validate();
    return c;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << path.string() << ":" << line << ":" << col << ": malformed JSON (" << e.what() << ")";
        throw FormatError(os.str());
    }
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
    return run_config_from_json(read_json_file(path), base);
}

} // namespace dynalay
