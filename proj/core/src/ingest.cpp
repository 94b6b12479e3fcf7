#include "efcml/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace efcml {

namespace {

std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool parse_double(const std::string& tok, double& out) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '\'' || c == '"') {
            quoted = !quoted;
            continue;
        }
        if (c == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
        return s.substr(1, s.size() - 2);
    return s;
}

void finalize_ranges(Dataset& d) {
    d.feature_ranges.assign(static_cast<std::size_t>(d.p), Range{0.0, 0.0});
    if (d.samples.empty()) return;
    for (Index j = 0; j < d.p; ++j) {
        double lo = d.samples.front().x(j);
        double hi = lo;
        for (const auto& s : d.samples) {
            lo = std::min(lo, s.x(j));
            hi = std::max(hi, s.x(j));
        }
        d.feature_ranges[static_cast<std::size_t>(j)] = Range{lo, hi};
    }
}

struct ArffAttribute {
    std::string name;
    enum class Kind { Numeric, Binary01, BinaryBool, OtherNominal } kind;
};

}  // namespace

std::vector<std::string> load_label_xml(const std::filesystem::path& xml_path) {
    std::ifstream in(xml_path);
    if (!in) throw IoError("cannot open label xml: " + xml_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<std::string> names;
    std::size_t pos = 0;
    while ((pos = text.find("<label", pos)) != std::string::npos) {
        auto end = text.find('>', pos);
        if (end == std::string::npos)
            throw MalformedFileError("unterminated <label> element in " + xml_path.string());
        std::string elem = text.substr(pos, end - pos);
        auto npos = elem.find("name");
        if (npos != std::string::npos) {
            auto q1 = elem.find_first_of("\"'", npos);
            if (q1 != std::string::npos) {
                char q = elem[q1];
                auto q2 = elem.find(q, q1 + 1);
                if (q2 == std::string::npos)
                    throw MalformedFileError("unterminated name attribute in " + xml_path.string());
                names.push_back(elem.substr(q1 + 1, q2 - q1 - 1));
            }
        }
        pos = end + 1;
    }
    if (names.empty())
        throw MalformedFileError("no <label name=...> elements in " + xml_path.string());
    return names;
}

Dataset load_arff(const std::filesystem::path& arff_path,
                  const std::vector<std::string>& label_names) {
    std::ifstream in(arff_path);
    if (!in) throw IoError("cannot open arff: " + arff_path.string());

    std::vector<ArffAttribute> attrs;
    bool in_data = false;
    std::vector<std::vector<std::string>> rows;

    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.empty() || line.front() == '%') continue;
        if (!in_data && line.front() == '@') {
            std::istringstream ls(line);
            std::string kw;
            ls >> kw;
            kw = lower(kw);
            if (kw == "@relation") continue;
            if (kw == "@data") {
                in_data = true;
                continue;
            }
            if (kw == "@attribute") {
                std::string rest = trim(line.substr(kw.size()));
                // name may be quoted and contain spaces
                std::string name;
                std::string type;
                if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
                    char q = rest.front();
                    auto q2 = rest.find(q, 1);
                    if (q2 == std::string::npos)
                        throw MalformedFileError("unterminated attribute name: " + line);
                    name = rest.substr(1, q2 - 1);
                    type = trim(rest.substr(q2 + 1));
                } else {
                    auto sp = rest.find_first_of(" \t");
                    if (sp == std::string::npos)
                        throw MalformedFileError("attribute without type: " + line);
                    name = rest.substr(0, sp);
                    type = trim(rest.substr(sp));
                }
                ArffAttribute a;
                a.name = name;
                std::string tl = lower(type);
                if (tl == "numeric" || tl == "real" || tl == "integer") {
                    a.kind = ArffAttribute::Kind::Numeric;
                } else if (!type.empty() && type.front() == '{') {
                    auto close = type.find('}');
                    if (close == std::string::npos)
                        throw MalformedFileError("unterminated nominal set: " + line);
                    auto vals = split_csv_row(type.substr(1, close - 1));
                    std::vector<std::string> lv;
                    for (auto& v : vals) lv.push_back(lower(v));
                    std::sort(lv.begin(), lv.end());
                    if (lv == std::vector<std::string>{"0", "1"})
                        a.kind = ArffAttribute::Kind::Binary01;
                    else if (lv == std::vector<std::string>{"false", "true"})
                        a.kind = ArffAttribute::Kind::BinaryBool;
                    else
                        a.kind = ArffAttribute::Kind::OtherNominal;
                } else {
                    throw MalformedFileError("unsupported attribute type: " + line);
                }
                attrs.push_back(std::move(a));
                continue;
            }
            throw MalformedFileError("unknown ARFF keyword: " + kw);
        }
        if (!in_data)
            throw MalformedFileError("data row before @data: " + line);
        if (line.front() == '{')
            throw MalformedFileError("sparse ARFF rows are not supported");
        rows.push_back(split_csv_row(line));
    }
    if (attrs.empty()) throw MalformedFileError("no @attribute declarations in " + arff_path.string());

    // resolve label columns
    std::vector<Index> label_cols;
    std::vector<bool> is_label(attrs.size(), false);
    for (const auto& want : label_names) {
        bool found = false;
        for (std::size_t j = 0; j < attrs.size(); ++j) {
            if (attrs[j].name == want) {
                if (is_label[j]) throw UnknownLabelError("label listed twice: " + want);
                if (attrs[j].kind == ArffAttribute::Kind::OtherNominal)
                    throw MalformedFileError("label attribute " + want + " is not binary");
                is_label[j] = true;
                label_cols.push_back(static_cast<Index>(j));
                found = true;
                break;
            }
        }
        if (!found) throw UnknownLabelError("label not declared in ARFF: " + want);
    }

    std::vector<Index> feature_cols;
    for (std::size_t j = 0; j < attrs.size(); ++j) {
        if (is_label[j]) continue;
        if (attrs[j].kind != ArffAttribute::Kind::Numeric)
            throw NonNumericFeatureError("non-numeric feature attribute: " + attrs[j].name);
        feature_cols.push_back(static_cast<Index>(j));
    }

    Dataset d;
    d.p = static_cast<Index>(feature_cols.size());
    d.k = static_cast<Index>(label_cols.size());
    for (Index c : label_cols) d.label_names.push_back(attrs[static_cast<std::size_t>(c)].name);

    std::int64_t id = 0;
    for (const auto& row : rows) {
        if (static_cast<Index>(row.size()) != static_cast<Index>(attrs.size()))
            throw MalformedFileError("row has " + std::to_string(row.size()) + " values, expected " +
                                     std::to_string(attrs.size()));
        Sample s;
        s.id = id++;
        s.x.resize(d.p);
        s.y.resize(d.k);
        for (Index j = 0; j < d.p; ++j) {
            const std::string tok = unquote(row[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])]);
            if (tok == "?") throw MissingValueError("missing feature value in row " + std::to_string(s.id));
            double v;
            if (!parse_double(tok, v) || !std::isfinite(v))
                throw NonNumericFeatureError("bad feature value '" + tok + "' in row " + std::to_string(s.id));
            s.x(j) = v;
        }
        for (Index c = 0; c < d.k; ++c) {
            std::string tok = lower(unquote(row[static_cast<std::size_t>(label_cols[static_cast<std::size_t>(c)])]));
            if (tok == "?") throw MissingValueError("missing label value in row " + std::to_string(s.id));
            if (tok == "0" || tok == "false")
                s.y(c) = 0;
            else if (tok == "1" || tok == "true")
                s.y(c) = 1;
            else
                throw MalformedFileError("bad label value '" + tok + "' in row " + std::to_string(s.id));
        }
        d.samples.push_back(std::move(s));
    }
    finalize_ranges(d);
    return d;
}

Dataset load_arff(const std::filesystem::path& arff_path,
                  const std::filesystem::path& label_xml_path) {
    return load_arff(arff_path, load_label_xml(label_xml_path));
}

Dataset load_csv(const std::filesystem::path& csv_path, Index num_labels,
                 bool labels_at_end, bool has_header) {
    if (num_labels < 1) throw DimensionMismatchError("num_labels must be positive");
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open csv: " + csv_path.string());

    Dataset d;
    d.k = num_labels;
    Index ncols = -1;
    std::string raw;
    bool first = true;
    std::int64_t id = 0;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        auto toks = split_csv_row(line);
        if (first && has_header) {
            ncols = static_cast<Index>(toks.size());
            if (ncols <= num_labels) throw DimensionMismatchError("fewer columns than labels");
            Index p = ncols - num_labels;
            for (Index c = 0; c < num_labels; ++c) {
                std::size_t col = static_cast<std::size_t>(labels_at_end ? p + c : c);
                d.label_names.push_back(toks[col]);
            }
            first = false;
            continue;
        }
        first = false;
        if (ncols < 0) {
            ncols = static_cast<Index>(toks.size());
            if (ncols <= num_labels) throw DimensionMismatchError("fewer columns than labels");
        } else if (static_cast<Index>(toks.size()) != ncols) {
            throw RaggedRowsError("row " + std::to_string(id) + " has " + std::to_string(toks.size()) +
                                  " columns, expected " + std::to_string(ncols));
        }
        Index p = ncols - num_labels;
        d.p = p;
        Sample s;
        s.id = id++;
        s.x.resize(p);
        s.y.resize(num_labels);
        for (Index col = 0; col < ncols; ++col) {
            const std::string& tok = toks[static_cast<std::size_t>(col)];
            bool is_label = labels_at_end ? (col >= p) : (col < num_labels);
            Index fi = labels_at_end ? col : col - num_labels;
            Index li = labels_at_end ? col - p : col;
            if (is_label) {
                if (tok == "0")
                    s.y(li) = 0;
                else if (tok == "1")
                    s.y(li) = 1;
                else
                    throw NonBinaryLabelError("label value '" + tok + "' in row " + std::to_string(s.id));
            } else {
                double v;
                if (!parse_double(tok, v) || !std::isfinite(v))
                    throw NonNumericFeatureError("bad feature value '" + tok + "' in row " +
                                                 std::to_string(s.id));
                s.x(fi) = v;
            }
        }
        d.samples.push_back(std::move(s));
    }
    if (d.samples.empty() && ncols < 0)
        throw MalformedFileError("empty csv: " + csv_path.string());
    if (d.label_names.empty())
        for (Index c = 0; c < d.k; ++c) d.label_names.push_back("label" + std::to_string(c));
    if (d.samples.empty() && ncols > 0) d.p = ncols - num_labels;
    finalize_ranges(d);
    return d;
}

namespace {

// full round-trip precision; the trend emitter owns the 9-digit format
std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_csv(const Dataset& d, const std::filesystem::path& csv_path,
              bool labels_at_end, bool write_header) {
    std::ofstream out(csv_path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw IoError("cannot write csv: " + csv_path.string());
    if (write_header) {
        std::vector<std::string> cols;
        for (Index j = 0; j < d.p; ++j) cols.push_back("f" + std::to_string(j));
        std::vector<std::string> labels = d.label_names;
        if (static_cast<Index>(labels.size()) != d.k)
            for (Index c = 0; c < d.k; ++c) labels.push_back("label" + std::to_string(c));
        if (labels_at_end)
            cols.insert(cols.end(), labels.begin(), labels.end());
        else
            cols.insert(cols.begin(), labels.begin(), labels.end());
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        out << "\n";
    }
    for (const auto& s : d.samples) {
        bool firstcol = true;
        auto emit = [&](const std::string& t) {
            if (!firstcol) out << ",";
            out << t;
            firstcol = false;
        };
        if (!labels_at_end)
            for (Index c = 0; c < d.k; ++c) emit(std::to_string(s.y(c)));
        for (Index j = 0; j < d.p; ++j) emit(fmt_number(s.x(j)));
        if (labels_at_end)
            for (Index c = 0; c < d.k; ++c) emit(std::to_string(s.y(c)));
        out << "\n";
    }
}

void save_arff(const Dataset& d, const std::filesystem::path& arff_path,
               const std::filesystem::path& xml_path,
               const std::string& relation_name) {
    std::ofstream out(arff_path, std::ios::binary);
    if (!out) throw IoError("cannot write arff: " + arff_path.string());
    out << "@relation " << relation_name << "\n\n";
    for (Index j = 0; j < d.p; ++j) out << "@attribute f" << j << " numeric\n";
    std::vector<std::string> labels = d.label_names;
    if (static_cast<Index>(labels.size()) != d.k) {
        labels.clear();
        for (Index c = 0; c < d.k; ++c) labels.push_back("label" + std::to_string(c));
    }
    for (const auto& name : labels) out << "@attribute " << name << " {0,1}\n";
    out << "\n@data\n";
    for (const auto& s : d.samples) {
        for (Index j = 0; j < d.p; ++j) out << fmt_number(s.x(j)) << ",";
        for (Index c = 0; c < d.k; ++c) out << s.y(c) << (c + 1 < d.k ? "," : "");
        out << "\n";
    }

    std::ofstream xml(xml_path, std::ios::binary);
    if (!xml) throw IoError("cannot write label xml: " + xml_path.string());
    xml << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
    xml << "<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n";
    for (const auto& name : labels) xml << "  <label name=\"" << name << "\"></label>\n";
    xml << "</labels>\n";
}

StreamSplit split_stream(const Dataset& d, double fraction) {
    if (d.size() < 2) throw EmptyDatasetError("need at least 2 samples to split");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DimensionMismatchError("split fraction must lie in (0,1)");
    const Index n = d.size();
    const Index nb = static_cast<Index>(std::ceil(fraction * static_cast<double>(n)));
    if (nb >= n) throw StreamEmptyError("split leaves an empty stream");

    StreamSplit out;
    out.split_fraction = fraction;
    out.initial_batch.p = out.stream.p = d.p;
    out.initial_batch.k = out.stream.k = d.k;
    out.initial_batch.label_names = out.stream.label_names = d.label_names;
    out.initial_batch.samples.assign(d.samples.begin(), d.samples.begin() + nb);
    out.stream.samples.assign(d.samples.begin() + nb, d.samples.end());
    finalize_ranges(out.initial_batch);
    finalize_ranges(out.stream);
    return out;
}

std::vector<Range> update_ranges(std::vector<Range> ranges, const VectorXd& x) {
    if (static_cast<Index>(ranges.size()) != x.size())
        throw DimensionMismatchError("range/feature dimension mismatch");
    for (Index j = 0; j < x.size(); ++j) {
        auto& r = ranges[static_cast<std::size_t>(j)];
        r.lo = std::min(r.lo, x(j));
        r.hi = std::max(r.hi, x(j));
    }
    return ranges;
}

}  // namespace efcml
