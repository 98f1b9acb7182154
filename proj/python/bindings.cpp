#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loyalty/bench.hpp"
#include "loyalty/wire.hpp"

namespace py = pybind11;
using namespace loyalty;
using namespace loyalty::core;

namespace {

mpz_class mpz_from_int(const py::int_& v) {
    std::string dec = py::str(v);
    return mpz_class(dec, 10);
}

py::int_ int_from_mpz(const mpz_class& v) {
    return py::module_::import("builtins").attr("int")(v.get_str(10));
}

Scalar scalar_from_int(const py::int_& v) {
    mpz_class n = mpz_from_int(v);
    if (n <= 0 || n >= order()) throw py::value_error("scalar out of range [1, q-1]");
    return Scalar(n);
}

py::bytes bytes_of(std::span<const uint8_t> b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes bytes_from_py(const py::bytes& b) {
    std::string s = b;
    return Bytes(s.begin(), s.end());
}

ec::G2 g2_from_bytes(const py::bytes& b) {
    auto p = ec::deserialize_g2(bytes_from_py(b));
    if (!p) throw py::value_error("invalid G2 encoding");
    return *p;
}

ec::G1 g1_from_bytes(const py::bytes& b) {
    auto p = ec::deserialize_g1(bytes_from_py(b));
    if (!p) throw py::value_error("invalid G1 encoding");
    return *p;
}

std::unique_ptr<RandomSource> make_rng(const py::object& seed) {
    if (seed.is_none()) return nullptr;  // caller falls back to the system rng
    return std::make_unique<SeededRandom>(uint64_t(py::int_(seed)));
}

RandomSource& rng_or_system(std::unique_ptr<RandomSource>& owned) {
    if (owned) return *owned;
    return SystemRandom::instance();
}

py::dict token_dict(const tokens::Token& t) {
    py::dict d;
    d["c"] = t.c;
    d["alpha"] = int_from_mpz(t.m.alpha.v);
    d["y"] = int_from_mpz(t.m.y.v);
    d["sigma"] = bytes_of(ec::serialize(t.sigma.sigma));
    return d;
}

tokens::Token token_from_dict(const py::dict& d) {
    tokens::Token t;
    t.c = py::str(d["c"]);
    t.m.alpha = scalar_from_int(py::int_(d["alpha"]));
    t.m.y = scalar_from_int(py::int_(d["y"]));
    t.sigma.sigma = g2_from_bytes(py::bytes(d["sigma"]));
    return t;
}

}  // namespace

PYBIND11_MODULE(pyloyalty, m) {
    m.doc() = "privacy-preserving loyalty tokens: partially blind signatures, "
              "spent ledger, taxonomy generalization and the reward engine";

    py::class_<SystemParams>(m, "SystemParams")
        .def_readonly("curve", &SystemParams::curve)
        .def_property_readonly("q", [](const SystemParams& p) { return int_from_mpz(p.q); })
        .def("serialize", [](const SystemParams& p) { return bytes_of(p.serialize()); })
        .def("__repr__", [](const SystemParams& p) {
            return "<SystemParams curve=" + p.curve + ">";
        });

    m.def("setup", &setup, py::arg("lambda_bits") = 128,
          "generate the public parameters (only 128 is supported)");

    m.def("hash_to_scalar", [](const py::bytes& data) {
        return int_from_mpz(hash_to_scalar(bytes_from_py(data)).v);
    });
    m.def("hash_to_group", [](const py::bytes& data) {
        return bytes_of(ec::serialize(hash_to_group(bytes_from_py(data))));
    });
    m.def("random_scalar", [](const py::object& seed) {
        auto rng = make_rng(seed);
        return int_from_mpz(random_scalar(rng_or_system(rng)).v);
    }, py::arg("seed") = py::none());

    py::class_<pbsig::VendorKeyPair>(m, "VendorKeyPair")
        .def_property_readonly("sk",
                               [](const pbsig::VendorKeyPair& k) { return int_from_mpz(k.sk.v); })
        .def_property_readonly("pk", [](const pbsig::VendorKeyPair& k) {
            return bytes_of(ec::serialize(k.pk));
        });

    m.def("keygen", [](const SystemParams& p, const py::object& seed) {
        auto rng = make_rng(seed);
        return pbsig::VendorKeyPair::generate(p, rng_or_system(rng));
    }, py::arg("params"), py::arg("seed") = py::none());
    m.def("keypair_from_secret", [](const SystemParams& p, const py::int_& sk) {
        return pbsig::VendorKeyPair::from_secret(p, scalar_from_int(sk));
    });

    m.def("blind", [](const SystemParams& p, const std::string& c, const py::int_& alpha,
                      const py::int_& y, const py::int_& r) {
        auto res = pbsig::blind(p, c, Message{scalar_from_int(alpha), scalar_from_int(y)},
                                scalar_from_int(r));
        return bytes_of(ec::serialize(res.u));
    }, "u = H0(c||m)^r");
    m.def("sign_blinded", [](const pbsig::VendorKeyPair& keys, const std::string& c,
                             const py::bytes& u) {
        return bytes_of(ec::serialize(pbsig::sign_blinded(keys, c, g2_from_bytes(u))));
    }, "v = u^((H(c)+sk)^-1)");
    m.def("unblind", [](const py::bytes& v, const std::string& c, const py::int_& alpha,
                        const py::int_& y, const py::int_& r) {
        pbsig::BlindingState st{scalar_from_int(r), c,
                                Message{scalar_from_int(alpha), scalar_from_int(y)}};
        return bytes_of(ec::serialize(pbsig::unblind(g2_from_bytes(v), st).sigma));
    }, "sigma = v^(r^-1)");
    m.def("verify", [](const SystemParams& p, const py::bytes& pk, const std::string& c,
                       const py::int_& alpha, const py::int_& y, const py::bytes& sigma) {
        auto sig = ec::deserialize_g2(bytes_from_py(sigma));
        auto pk_pt = ec::deserialize_g1(bytes_from_py(pk));
        if (!sig || !pk_pt) return false;
        return pbsig::verify(p, *pk_pt, c, Message{scalar_from_int(alpha), scalar_from_int(y)},
                             pbsig::Signature{*sig});
    });
    m.def("aggregate", [](const std::vector<py::bytes>& sigmas) {
        std::vector<pbsig::Signature> sigs;
        for (const auto& s : sigmas) sigs.push_back({g2_from_bytes(s)});
        return bytes_of(ec::serialize(pbsig::aggregate(sigs).sigma));
    });
    m.def("verify_aggregate", [](const SystemParams& p, const py::bytes& pk, const std::string& c,
                                 const std::vector<std::pair<py::int_, py::int_>>& messages,
                                 const py::bytes& sigma_agg) {
        auto sig = ec::deserialize_g2(bytes_from_py(sigma_agg));
        auto pk_pt = ec::deserialize_g1(bytes_from_py(pk));
        if (!sig || !pk_pt) return false;
        std::vector<Message> ms;
        for (const auto& [a, y] : messages) ms.push_back({scalar_from_int(a), scalar_from_int(y)});
        return pbsig::verify_aggregate(p, *pk_pt, c, ms, pbsig::Signature{*sig});
    });

    m.def("issue", [](const SystemParams& p, const pbsig::VendorKeyPair& keys,
                      const std::string& c, const py::int_& y, const py::object& seed) {
        auto rng = make_rng(seed);
        auto t = tokens::issue_in_process(p, keys, c, scalar_from_int(y), rng_or_system(rng));
        return token_dict(t);
    }, py::arg("params"), py::arg("keys"), py::arg("c"), py::arg("y"), py::arg("seed") = py::none(),
       "run both halves of the issuance protocol in process");

    py::class_<tokens::SpentLedger>(m, "SpentLedger")
        .def(py::init<>())
        .def_static("open", &tokens::SpentLedger::open)
        .def("spent_count", &tokens::SpentLedger::spent_count)
        .def("is_spent", [](const tokens::SpentLedger& l, const py::int_& alpha) {
            return l.is_spent(scalar_from_int(alpha));
        })
        .def("linkage_report", [](const tokens::SpentLedger& l, const py::int_& y) {
            py::list out;
            for (const auto& r : l.linkage_report(scalar_from_int(y))) {
                py::dict d;
                d["c"] = r.c;
                d["alpha"] = int_from_mpz(r.alpha.v);
                d["ts_ms"] = r.ts_ms;
                out.append(d);
            }
            return out;
        });

    m.def("verify_and_spend", [](const SystemParams& p, tokens::SpentLedger& ledger,
                                 const py::bytes& pk, const py::dict& token, int64_t now_ms) {
        auto pk_pt = g1_from_bytes(pk);
        auto out = tokens::verify_and_spend(p, ledger, pk_pt, token_from_dict(token), now_ms);
        py::dict d;
        d["status"] = tokens::to_string(out.status);
        d["linked_existing"] = out.linked_existing;
        d["group_size"] = out.group_size;
        return d;
    });

    py::class_<tax::Taxonomy>(m, "Taxonomy")
        .def_static("parse", &tax::Taxonomy::parse)
        .def_property_readonly("root", &tax::Taxonomy::root)
        .def_property_readonly("leaf_depth", &tax::Taxonomy::leaf_depth)
        .def("contains", &tax::Taxonomy::contains)
        .def("is_leaf", &tax::Taxonomy::is_leaf)
        .def("depth", &tax::Taxonomy::depth)
        .def("generalize", &tax::Taxonomy::generalize)
        .def("path_to_root", &tax::Taxonomy::path_to_root)
        .def("leaves", &tax::Taxonomy::leaves)
        .def("canonical_text", &tax::Taxonomy::canonical_text)
        .def("validate_chain", [](const tax::Taxonomy& t, const std::vector<std::string>& labels) {
            auto r = t.validate_chain(labels);
            return py::make_tuple(r.valid, r.start_depth, r.reason);
        });

    py::class_<program::RewardPolicy>(m, "RewardPolicy")
        .def(py::init<>())
        .def_readwrite("base_per_level", &program::RewardPolicy::base_per_level)
        .def_readwrite("linkage_scale", &program::RewardPolicy::linkage_scale)
        .def_readwrite("linkage_gamma", &program::RewardPolicy::linkage_gamma)
        .def_readwrite("window_days", &program::RewardPolicy::window_days);
    m.def("reward_group_total", &program::reward_group_total, "R(n) under a policy");
    m.def("reward_claim_base", &program::reward_claim_base);

    py::class_<program::Vendor>(m, "Vendor")
        .def(py::init([](const SystemParams& p, const std::string& taxonomy_doc,
                         const program::RewardPolicy& policy, const py::object& seed) {
                 program::VendorConfig cfg;
                 cfg.policy = policy;
                 auto rng = make_rng(seed);
                 return std::make_unique<program::Vendor>(p, taxonomy_doc, cfg,
                                                          rng_or_system(rng));
             }),
             py::arg("params"), py::arg("taxonomy_doc"),
             py::arg("policy") = program::RewardPolicy{}, py::arg("seed") = py::none())
        .def_property_readonly("pk", [](const program::Vendor& v) {
            return bytes_of(ec::serialize(v.keys().pk));
        })
        .def_property_readonly("vendor_id",
                               [](const program::Vendor& v) { return v.config().vendor_id; })
        .def("bundle_json", [](const program::Vendor& v) { return v.bundle().dump(); })
        .def("spent_count", [](const program::Vendor& v) { return v.ledger().spent_count(); })
        .def("linkage_group_sizes", [](const program::Vendor& v) {
            py::list out;
            for (const auto& y : v.ledger().linkage_keys())
                out.append(v.ledger().linkage_report(y).size());
            return out;
        });

    py::class_<program::Wallet>(m, "Wallet")
        .def(py::init([](program::Vendor& v) {
            return program::Wallet(program::VendorBundle::from_json(v.bundle()));
        }))
        .def_property_readonly("awarded_total",
                               [](const program::Wallet& w) { return w.awarded_total; })
        .def_property_readonly("redeemed_total",
                               [](const program::Wallet& w) { return w.redeemed_total; })
        .def("purchases", [](const program::Wallet& w) {
            py::list out;
            for (const auto& p : w.purchases()) {
                py::dict d;
                d["id"] = p.id;
                d["product"] = p.product;
                d["persona"] = p.persona;
                d["consumed"] = p.consumed;
                py::list toks;
                for (const auto& t : p.tokens) toks.append(token_dict(t));
                d["tokens"] = toks;
                out.append(d);
            }
            return out;
        })
        .def("points", [](const program::Wallet& w) {
            py::list out;
            for (const auto& p : w.points()) {
                py::dict d;
                d["denom"] = p.denom;
                d["expires"] = p.expires;
                d["spent"] = p.spent;
                out.append(d);
            }
            return out;
        })
        .def("save", &program::Wallet::save)
        .def_static("load", &program::Wallet::load);

    m.def("buy", [](program::Wallet& w, program::Vendor& v, const std::string& product,
                    const py::object& persona, const py::object& seed) {
        auto rng = make_rng(seed);
        std::optional<std::string> p;
        if (!persona.is_none()) p = std::string(py::str(persona));
        wire::LocalChannel ch(v);
        auto purchase = wire::buy(w, ch, product, p, rng_or_system(rng));
        py::dict d;
        d["id"] = purchase.id;
        d["tokens"] = int(purchase.tokens.size());
        py::list labels;
        for (const auto& t : purchase.tokens)
            labels.append(program::PublicInfo::parse(t.c)->label);
        d["labels"] = labels;
        return d;
    }, py::arg("wallet"), py::arg("vendor"), py::arg("product"), py::arg("persona") = py::none(),
       py::arg("seed") = py::none());

    m.def("submit", [](program::Wallet& w, program::Vendor& v,
                       const std::vector<std::pair<uint64_t, size_t>>& claims,
                       const py::object& seed) {
        auto rng = make_rng(seed);
        std::vector<wire::ClaimSpec> specs;
        for (const auto& [id, level] : claims) specs.push_back({id, level});
        wire::LocalChannel ch(v);
        auto s = wire::submit(w, ch, specs, rng_or_system(rng));
        py::dict d;
        d["award"] = s.award;
        d["points_received"] = s.points_received;
        py::list results;
        for (const auto& r : s.claims) {
            py::dict rd;
            rd["accepted"] = r.accepted;
            rd["reason"] = r.reason;
            rd["level"] = r.level;
            rd["base"] = r.base;
            rd["bonus"] = r.bonus;
            results.append(rd);
        }
        d["claims"] = results;
        return d;
    }, py::arg("wallet"), py::arg("vendor"), py::arg("claims"), py::arg("seed") = py::none());

    m.def("redeem_all", [](program::Wallet& w, program::Vendor& v) {
        std::vector<size_t> all;
        std::string today = program::date_of(v.now_ms());
        for (size_t i = 0; i < w.points().size(); ++i)
            if (!w.points()[i].spent && w.points()[i].expires >= today) all.push_back(i);
        py::dict d;
        if (all.empty()) {
            d["credited"] = 0;
            d["all_accepted"] = true;
            return d;
        }
        wire::LocalChannel ch(v);
        auto r = wire::redeem(w, ch, all);
        d["credited"] = r.credited;
        d["all_accepted"] = r.all_accepted;
        return d;
    });

    m.def("run_bench", [](const SystemParams& p, size_t samples) {
        return bench::run_bench(p, samples).to_json().dump();
    }, py::arg("params"), py::arg("samples") = 100);
}
