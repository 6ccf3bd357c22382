#pragma once

// Private single-writer block ledger: transactions, Merkle roots,
// hash-linked headers and append-only file persistence.

#include "landrec/bytes.hpp"
#include "landrec/record_pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace landrec::ledger {

enum class TxKind : std::uint8_t { Genesis = 0, Register = 1, Transfer = 2 };

const char* to_string(TxKind kind);

struct TransactionRecord {
    Hash256 tx_id{};
    TxKind kind = TxKind::Genesis;
    std::string owner_id;
    pipeline::DnaCiphertext payload;
    Hash256 deed_hash{}; // all-zero unless kind == Transfer
    std::uint64_t created_at = 0;

    bool operator==(const TransactionRecord&) const = default;
};

// kind u8 | owner_id str16 | dna str32 | key_fingerprint 32 | deed_hash 32 | created_at u64
Bytes serialize_transaction(const TransactionRecord& tx);
TransactionRecord parse_transaction(ByteSpan bytes);
Hash256 compute_tx_id(const TransactionRecord& tx);

// Builds a record with tx_id filled in. Throws Error("invalid-transaction")
// when kind-specific fields are missing.
TransactionRecord make_transaction(TxKind kind, std::string owner_id, pipeline::DnaCiphertext payload,
                                   const Hash256& deed_hash, std::uint64_t created_at);
// Empty string when valid, otherwise the reason.
std::string check_transaction(const TransactionRecord& tx);

inline constexpr std::size_t kHeaderSize = 92;

struct BlockHeader {
    std::uint64_t block_id = 0;
    Hash256 prev_hash{};
    std::uint32_t tx_count = 0;
    std::uint64_t nonce = 0; // carried for structure, always 0 (no mining)
    Hash256 merkle_root{};
    std::uint64_t timestamp = 0;

    bool operator==(const BlockHeader&) const = default;
};

struct Block {
    BlockHeader header;
    std::vector<TransactionRecord> transactions;

    bool operator==(const Block&) const = default;
};

Bytes serialize_header(const BlockHeader& header);
Hash256 block_hash(const Block& block);

// Pairwise SHA-256(left || right) up to the root, an odd node paired with
// itself. Throws Error("empty-block") on an empty list.
Hash256 merkle_root(std::span<const Hash256> leaves);
Hash256 merkle_root(const std::vector<TransactionRecord>& txs);

// Block record: header | tx_count x (u32 length | transaction) | block hash.
// The trailing hash seals the header so that the tip cannot be edited
// without detection.
Bytes serialize_block(const Block& block);

struct ChainViolation {
    std::uint64_t position = 0;
    std::string reason; // link-broken, merkle-mismatch, malformed, ...
    std::string detail;
};

// First violation in positional order, or nullopt when the chain is sound.
std::optional<ChainViolation> verify_chain(std::span<const Block> blocks);

struct ParsedChain {
    std::vector<Block> blocks;
    std::vector<std::uint64_t> offsets; // byte offset of each record
    std::optional<ChainViolation> violation;
};

// Parses a chain file image (sequence of u32-length-prefixed block records),
// stopping at the first structural violation.
ParsedChain parse_chain(ByteSpan file_bytes);

// Parse plus verify_chain.
std::optional<ChainViolation> verify_chain_bytes(ByteSpan file_bytes);

// Where block records live. append must be all-or-nothing.
class BlockStore {
public:
    virtual ~BlockStore() = default;
    virtual Bytes load_all() = 0;
    virtual void append(std::uint64_t block_id, ByteSpan record) = 0;
};

class MemoryBlockStore final : public BlockStore {
public:
    Bytes load_all() override { return image_; }
    void append(std::uint64_t block_id, ByteSpan record) override;
    const Bytes& image() const { return image_; }

private:
    Bytes image_;
};

// chain.dat holds the records; chain.idx maps block id to byte offset and
// is rebuilt from a full scan whenever it disagrees with chain.dat.
class FileBlockStore final : public BlockStore {
public:
    explicit FileBlockStore(std::filesystem::path dir);

    Bytes load_all() override;
    void append(std::uint64_t block_id, ByteSpan record) override;

    const std::filesystem::path& chain_path() const { return chain_path_; }
    const std::filesystem::path& index_path() const { return index_path_; }

    // Rewrites the index from offsets obtained by a full scan.
    void rebuild_index(std::span<const std::uint64_t> offsets);
    bool index_matches(std::span<const std::uint64_t> offsets) const;

private:
    std::filesystem::path chain_path_;
    std::filesystem::path index_path_;
};

// Random access through the sidecar index without loading the chain.
// Throws Error("not-found") or Error("chain-corrupt").
Block read_block_from_dir(const std::filesystem::path& dir, std::uint64_t block_id);

using Clock = std::function<std::uint64_t()>;
std::uint64_t unix_now();

class Ledger {
public:
    // Loads and verifies the stored chain, creating the genesis block when
    // the store is empty. Throws Error("chain-corrupt") on any violation.
    explicit Ledger(std::unique_ptr<BlockStore> store, Clock clock = unix_now);

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    // Persists before returning the new block id. Throws Error("empty-block"),
    // Error("invalid-transaction") or Error("persistence-failure"); the chain
    // is unchanged on failure.
    std::uint64_t append_block(std::vector<TransactionRecord> transactions);

    // Throws Error("not-found").
    Block get_block(std::uint64_t block_id) const;
    Block tip() const;
    std::uint64_t height() const; // number of blocks
    std::vector<Block> snapshot() const;
    std::optional<ChainViolation> verify() const;

private:
    std::unique_ptr<BlockStore> store_;
    Clock clock_;
    std::mutex writer_mu_;
    mutable std::shared_mutex mu_;
    std::vector<Block> blocks_;
};

} // namespace landrec::ledger
