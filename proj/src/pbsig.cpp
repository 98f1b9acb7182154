#include "loyalty/pbsig.hpp"

#include <set>

namespace loyalty::pbsig {

using core::encode_preimage;
using core::hash_to_group;
using core::hash_to_scalar;
using core::sc_add;
using core::sc_inv;

VendorKeyPair VendorKeyPair::generate(const SystemParams& params, RandomSource& rng) {
    return from_secret(params, core::random_scalar(rng));
}

VendorKeyPair VendorKeyPair::from_secret(const SystemParams& params, const Scalar& sk) {
    if (sk.is_zero()) throw std::invalid_argument("secret key must be nonzero");
    return {sk, ec::mul(params.g, sk.v)};
}

BlindResult blind(const SystemParams& params, const std::string& c, const Message& m,
                  const Scalar& r) {
    (void)params;
    if (r.is_zero()) throw std::invalid_argument("blinding factor must be nonzero");
    ec::G2 base = hash_to_group(encode_preimage(c, m));
    return {ec::mul(base, r.v), BlindingState{r, c, m}};
}

ec::G2 sign_blinded(const VendorKeyPair& keys, const std::string& c, const ec::G2& u) {
    Scalar e = sc_add(hash_to_scalar(c), keys.sk);
    if (e.is_zero()) throw SigningError("degenerate public info: H(c) + sk = 0");
    return ec::mul(u, sc_inv(e).v);
}

Signature unblind(const ec::G2& v, const BlindingState& state) {
    return {ec::mul(v, sc_inv(state.r).v)};
}

bool verify(const SystemParams& params, const ec::G1& pk, const std::string& c, const Message& m,
            const Signature& sig) {
    if (sig.sigma.is_infinity()) return false;
    if (pk.is_infinity()) return false;
    if (m.alpha.is_zero() || m.y.is_zero()) return false;
    // e(g^H(c) * pk, sigma) == e(g, H0(c||m))
    ec::G1 left = ec::add(ec::mul(params.g, hash_to_scalar(c).v), pk);
    ec::Gt lhs = ec::pair(left, sig.sigma);
    ec::Gt rhs = ec::pair(params.g, hash_to_group(encode_preimage(c, m)));
    return lhs == rhs;
}

Signature aggregate(const std::vector<Signature>& sigs) {
    if (sigs.empty()) throw std::invalid_argument("aggregate of empty signature list");
    ec::G2 acc = sigs[0].sigma;
    for (size_t i = 1; i < sigs.size(); ++i) acc = ec::add(acc, sigs[i].sigma);
    return {acc};
}

bool verify_aggregate(const SystemParams& params, const ec::G1& pk, const std::string& c,
                      const std::vector<Message>& messages, const Signature& sigma_agg) {
    if (messages.empty()) return false;
    if (sigma_agg.sigma.is_infinity()) return false;
    if (pk.is_infinity()) return false;
    std::set<mpz_class> alphas;
    for (const auto& m : messages) {
        if (m.alpha.is_zero() || m.y.is_zero()) return false;
        if (!alphas.insert(m.alpha.v).second) return false;  // duplicate alpha
    }
    ec::G2 prod = hash_to_group(encode_preimage(c, messages[0]));
    for (size_t i = 1; i < messages.size(); ++i)
        prod = ec::add(prod, hash_to_group(encode_preimage(c, messages[i])));
    ec::G1 left = ec::add(ec::mul(params.g, hash_to_scalar(c).v), pk);
    return ec::pair(left, sigma_agg.sigma) == ec::pair(params.g, prod);
}

}  // namespace loyalty::pbsig
