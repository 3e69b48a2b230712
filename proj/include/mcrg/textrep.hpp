#pragma once

#include "mcrg/tensor.hpp"

#include <json.hpp>

#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mcrg {

// Lowercased alphanumeric runs, with camelCase / PascalCase / ACRONYMWord
// boundaries split ("getHTTPResponse" -> get, http, response).
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    // tokens[0] and tokens[1] are the reserved "<pad>" and "<unk>".
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> index;
    std::vector<int> df;  // parallel to tokens; 0 for the reserved ids
    int n_docs = 0;

    Vocabulary();
    int size() const { return static_cast<int>(tokens.size()); }
    // UNK for tokens not in the vocabulary.
    int id(const std::string& token) const;
    std::vector<int> encode(const std::vector<std::string>& tokens) const;
};

// Keeps tokens with df >= min_df, ordered by (df desc, token asc), at most
// max_size ids including PAD and UNK. Throws InvalidArgument when
// min_df < 1 or max_size < 2.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, int min_df = 2, int max_size = 5000);

// token id -> tf * ln(n_docs / df).
using TfIdfVector = std::map<int, double>;
TfIdfVector tfidf(const std::vector<std::string>& doc, const Vocabulary& vocab);

// |V| x d trainable matrix. Row PAD stays zero: it is never looked up and
// so never receives a gradient.
struct EmbeddingTable {
    nn::Tensor weights;

    static EmbeddingTable init(int vocab_size, int dim, std::mt19937_64& rng);
    int dim() const { return static_cast<int>(weights.cols()); }
};

// Mean of the rows for `ids` (1 x d); zero for an empty list.
nn::Tensor embed_comment(const std::vector<int>& ids, const EmbeddingTable& table);
// One row per comment.
nn::Tensor embed_comments(const std::vector<std::vector<int>>& ids, const EmbeddingTable& table);

// {"tokens": [...], "df": [...], "n_docs": N}; reserved ids are implicit.
nlohmann::json to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace mcrg
