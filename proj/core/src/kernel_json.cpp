#include "unitlab/kernel_json.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace unitlab {

using nlohmann::json;

std::string kernel_to_json(const OperatorKernel& kernel, int indent) {
  json doc;
  doc["dim"] = kernel.dim();
  doc["labels"] = kernel.labels();
  json entries = json::object();
  for (std::size_t s = 0; s < kernel.size(); ++s)
    for (std::size_t t = 0; t < kernel.size(); ++t) {
      const Matrix& rep = kernel.at(s, t).rep();
      json values = json::array();
      for (Eigen::Index i = 0; i < rep.rows(); ++i)
        for (Eigen::Index j = 0; j < rep.cols(); ++j)
          values.push_back({rep(i, j).real(), rep(i, j).imag()});
      entries[kernel.labels()[s] + "|" + kernel.labels()[t]] = std::move(values);
    }
  doc["entries"] = std::move(entries);
  return doc.dump(indent);
}

OperatorKernel kernel_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("kernel json: ") + e.what());
  }
  try {
    const int d = doc.at("dim").get<int>();
    if (d <= 0) throw ParseError("kernel json: dim must be positive");
    auto labels = doc.at("labels").get<std::vector<std::string>>();
    for (const auto& l : labels)
      if (l.find('|') != std::string::npos)
        throw ParseError("kernel json: label '" + l + "' contains '|'");
    OperatorKernel kernel(d, labels);
    const json& entries = doc.at("entries");
    const auto block = static_cast<Eigen::Index>(d) * d;
    for (std::size_t s = 0; s < labels.size(); ++s)
      for (std::size_t t = 0; t < labels.size(); ++t) {
        const std::string key = labels[s] + "|" + labels[t];
        if (!entries.contains(key)) throw ParseError("kernel json: missing entry '" + key + "'");
        const json& values = entries.at(key);
        if (!values.is_array() || static_cast<Eigen::Index>(values.size()) != block * block)
          throw ParseError("kernel json: entry '" + key + "' must hold d^4 values");
        Matrix rep(block, block);
        for (Eigen::Index i = 0; i < block; ++i)
          for (Eigen::Index j = 0; j < block; ++j) {
            const json& v = values.at(static_cast<std::size_t>(i * block + j));
            if (!v.is_array() || v.size() != 2)
              throw ParseError("kernel json: values are [re, im] pairs (entry '" + key + "')");
            rep(i, j) = Complex(v[0].get<double>(), v[1].get<double>());
          }
        kernel.set(s, t, Superoperator(std::move(rep)));
      }
    if (entries.size() != labels.size() * labels.size())
      throw ParseError("kernel json: entries hold keys outside labels x labels");
    return kernel;
  } catch (const json::exception& e) {
    throw ParseError(std::string("kernel json: ") + e.what());
  } catch (const LabelError& e) {
    throw ParseError(std::string("kernel json: ") + e.what());
  }
}

OperatorKernel read_kernel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open kernel file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return kernel_from_json(buffer.str());
}

void write_kernel_file(const std::filesystem::path& path, const OperatorKernel& kernel) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write kernel file " + path.string());
  out << kernel_to_json(kernel, 2) << '\n';
}

}  // namespace unitlab
