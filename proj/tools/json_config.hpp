#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace atlas::cli {

// CLI11 config formatter reading and writing flat JSON objects whose keys
// are long option names without the leading dashes. Keys are routed to the
// subcommand named by section.
class JsonConfig : public CLI::Config {
 public:
  std::string section;

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return resolved(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!section.empty()) item.parents = {section};
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

  // Every option of app with its parsed value, or its default when unset.
  static nlohmann::ordered_json resolved(const CLI::App* app, bool default_also = true) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : app->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      std::vector<std::string> values;
      if (opt->count() > 0) {
        values = opt->results();
      } else if (default_also) {
        const std::string d = opt->get_default_str();
        if (!d.empty()) values.push_back(d);
        else if (opt->get_type_size() == 0) values.push_back("false");
      }
      if (values.empty()) continue;
      if (opt->get_expected_max() > 1) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& v : values) arr.push_back(typed(v));
        j[name] = std::move(arr);
      } else {
        j[name] = typed(values.back());
      }
    }
    return j;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  static nlohmann::ordered_json typed(const std::string& s) {
    if (s == "true" || s == "false") return s == "true";
    try {
      std::size_t pos = 0;
      const double d = std::stod(s, &pos);
      if (pos == s.size()) {
        if (s.find_first_of(".eE") == std::string::npos) return std::stoll(s);
        return d;
      }
    } catch (const std::exception&) {
    }
    return s;
  }
};

}  // namespace atlas::cli
