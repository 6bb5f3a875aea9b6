#include <cmath>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/label_encoding.hpp"

namespace semlabel {

using nlohmann::json;

namespace {

std::string apply_template(const std::string& tpl, const std::string& label) {
  static const std::string kSlot = "{label}";
  std::string out = tpl;
  for (std::size_t pos = 0; (pos = out.find(kSlot, pos)) != std::string::npos;
       pos += label.size())
    out.replace(pos, kSlot.size(), label);
  return out;
}

}  // namespace

EncodingTable fetch_embeddings(const EmbeddingEndpointConfig& endpoint,
                               const LabelVocabulary& vocab) {
  vocab.validate();
  if (endpoint.batch_size < 1)
    throw Error("bad-batch-size", "batch_size must be >= 1");

  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);

  httplib::Headers headers;
  if (!endpoint.auth_token.empty())
    headers.emplace("Authorization", "Bearer " + endpoint.auth_token);

  EncodingTable table;
  table.kind = EncodingKind::Fetched;

  const std::size_t n = vocab.size();
  const auto batch = static_cast<std::size_t>(endpoint.batch_size);
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t count = std::min(batch, n - start);
    json body;
    body["model"] = endpoint.model_name;
    json input = json::array();
    for (std::size_t i = 0; i < count; ++i)
      input.push_back(apply_template(endpoint.prompt_template, vocab.labels[start + i]));
    body["input"] = std::move(input);

    auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
    if (!res)
      throw Error("network", "embeddings request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw Error("http-status", "embeddings endpoint returned HTTP " +
                                     std::to_string(res->status));

    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw Error("malformed-json", std::string("embeddings response: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array())
      throw Error("malformed-json", "embeddings response lacks a data array");
    const auto& data = doc["data"];
    if (data.size() != count)
      throw Error("count-mismatch", "requested " + std::to_string(count) +
                                        " embeddings, got " + std::to_string(data.size()));

    std::vector<std::vector<double>> vectors(count);
    std::vector<bool> seen(count, false);
    for (const auto& item : data) {
      if (!item.contains("index") || !item.contains("embedding"))
        throw Error("malformed-json", "embeddings response item lacks index/embedding");
      const auto idx = item["index"].get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= count)
        throw Error("count-mismatch", "embedding index " + std::to_string(idx) +
                                          " outside batch of " + std::to_string(count));
      if (seen[static_cast<std::size_t>(idx)])
        throw Error("count-mismatch", "duplicate embedding index " + std::to_string(idx));
      seen[static_cast<std::size_t>(idx)] = true;
      auto& vec = vectors[static_cast<std::size_t>(idx)];
      for (const auto& cell : item["embedding"]) {
        const double v = cell.get<double>();
        if (std::isnan(v))
          throw Error("nan-embedding", "embedding contains NaN");
        vec.push_back(v);
      }
    }

    for (std::size_t i = 0; i < count; ++i) {
      const auto& vec = vectors[i];
      if (table.dim == 0) {
        if (vec.empty()) throw Error("zero-vector", "empty embedding vector");
        table.dim = vec.size();
        table.vectors.resize(n, table.dim);
      }
      if (vec.size() != table.dim)
        throw Error("dim-mismatch", "embedding length " + std::to_string(vec.size()) +
                                        " != " + std::to_string(table.dim));
      double* dst = table.vectors.row(start + i);
      for (std::size_t j = 0; j < table.dim; ++j) dst[j] = vec[j];
    }
  }
  return table;
}

}  // namespace semlabel
