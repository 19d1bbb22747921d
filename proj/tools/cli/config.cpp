#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cr/errors.hpp"
#include "scenario_schema.hpp"

namespace cr::cli {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const auto m = node.Mark();
    if (m.is_null()) throw SchemaError(what);
    throw SchemaError(what, m.line + 1, m.column + 1);
}

bool is_number(const YAML::Node& n) {
    if (!n.IsScalar()) return false;
    try {
        n.as<double>();
        return true;
    } catch (const YAML::Exception&) {
        return false;
    }
}

bool is_integer(const YAML::Node& n) {
    if (!n.IsScalar()) return false;
    try {
        n.as<long long>();
        return true;
    } catch (const YAML::Exception&) {
        return false;
    }
}

bool is_bool(const YAML::Node& n) {
    if (!n.IsScalar()) return false;
    try {
        n.as<bool>();
        return true;
    } catch (const YAML::Exception&) {
        return false;
    }
}

std::string child(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

YAML::Node read_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw SchemaError("malformed YAML: " + e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

} // namespace

const std::string& schema_text() {
    static const std::string text = generated::scenario_schema;
    return text;
}

void validate(const YAML::Node& doc, const YAML::Node& schema, const std::string& where) {
    const std::string type = schema["type"].as<std::string>();
    const std::string at = where.empty() ? "document" : where;
    if (type == "map") {
        if (!doc.IsMap()) fail(doc, at + " must be a mapping");
        const YAML::Node keys = schema["keys"], values = schema["values"];
        for (const auto& kv : doc) {
            const std::string key = kv.first.as<std::string>();
            if (keys && keys[key]) {
                validate(kv.second, keys[key], child(where, key));
            } else if (values) {
                validate(kv.second, values, child(where, key));
            } else {
                fail(kv.first, "unknown key '" + child(where, key) + "'");
            }
        }
        if (const YAML::Node req = schema["required"])
            for (const auto& r : req)
                if (!doc[r.as<std::string>()]) fail(doc, at + " needs key '" + r.as<std::string>() + "'");
    } else if (type == "list") {
        if (!doc.IsSequence()) fail(doc, at + " must be a list");
        if (schema["min_items"] && doc.size() < schema["min_items"].as<std::size_t>())
            fail(doc, at + " needs at least " + schema["min_items"].as<std::string>() + " entries");
        if (schema["max_items"] && doc.size() > schema["max_items"].as<std::size_t>())
            fail(doc, at + " takes at most " + schema["max_items"].as<std::string>() + " entries");
        for (std::size_t i = 0; i < doc.size(); ++i)
            validate(doc[i], schema["items"], at + "[" + std::to_string(i) + "]");
    } else if (type == "string") {
        if (!doc.IsScalar()) fail(doc, at + " must be a string");
        if (const YAML::Node e = schema["enum"]) {
            const std::string v = doc.as<std::string>();
            bool found = false;
            std::string allowed;
            for (const auto& opt : e) {
                found = found || opt.as<std::string>() == v;
                allowed += (allowed.empty() ? "" : ", ") + opt.as<std::string>();
            }
            if (!found) fail(doc, at + " must be one of: " + allowed);
        }
    } else if (type == "number") {
        if (!is_number(doc)) fail(doc, at + " must be a number");
    } else if (type == "integer") {
        if (!is_integer(doc)) fail(doc, at + " must be an integer");
    } else if (type == "bool") {
        if (!is_bool(doc)) fail(doc, at + " must be true or false");
    } else {
        throw SchemaError("schema uses unknown type " + type);
    }
}

void validate(const YAML::Node& doc) {
    static const YAML::Node schema = YAML::Load(schema_text());
    validate(doc, schema);
}

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ScenarioConfig cfg;
    cfg.base_dir = base_dir;
    cfg.root = read_yaml(text);
    if (!cfg.root || cfg.root.IsNull()) throw SchemaError("empty scenario file");
    validate(cfg.root);
    const YAML::Node sys = cfg.root["system"];
    if (const YAML::Node inc = sys["include"]) {
        if (sys.size() != 1) fail(sys, "system.include cannot be combined with other system keys");
        const auto path = base_dir / inc.as<std::string>();
        const ScenarioConfig other = load_config(path);
        cfg.root["system"] = other.root["system"];
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

} // namespace cr::cli
