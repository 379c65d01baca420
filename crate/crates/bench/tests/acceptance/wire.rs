//! Encode/decode round-trips of the three wire formats.

use std::io::{Cursor, ErrorKind as IoKind};
use std::net::{Ipv4Addr, SocketAddrV4};

use fmi_core::direct::frame::{Frame, FrameHeader, HEADER_LEN};
use fmi_core::mediated::protocol::{Incoming, Request, Response, OP_DELETE, OP_GET, OP_LIST_COUNT, OP_PUT};
use fmi_core::rendezvous::wire::{encode_request, read_request, Response as RdvResponse};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use crate::Checks;

const DDB_LIMIT: usize = 400_000;
const FOUR_GIB: u64 = 1 << 32;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn payload_len() -> impl Strategy<Value = usize> {
    prop_oneof![Just(0usize), Just(DDB_LIMIT), 0usize..4096]
}

/// Deterministic filler so large payloads cost no shrinking effort.
fn filler(len: usize, seed: u8) -> Vec<u8> {
    (0..len).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect()
}

fn frames(c: &mut Checks) {
    let r = runner(256).run(
        &(any::<u32>(), any::<u16>(), payload_len(), any::<u8>()),
        |(seq, tag, len, seed)| {
            let f = Frame { seq, tag, payload: filler(len, seed) };
            let bytes = f.encode();
            prop_assert_eq!(bytes.len(), HEADER_LEN + len);
            prop_assert_eq!(&Frame::decode(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?, &f);
            Ok(())
        },
    );
    c.check(r.is_ok(), format!("frame round-trip: {r:?}"));

    // lengths past 4 GiB, checked on the header alone
    let r = runner(512).run(
        &(any::<u32>(), any::<u16>(), FOUR_GIB..=u64::MAX),
        |(seq, tag, payload_len)| {
            let h = FrameHeader { seq, tag, payload_len };
            let bytes = h.encode();
            let field = bytes[8..16]
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &b)| acc + ((b as u128) << (8 * i)));
            prop_assert_eq!(field, payload_len as u128);
            prop_assert_eq!(FrameHeader::decode(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?, h);
            Ok(())
        },
    );
    c.check(r.is_ok(), format!("frame header above 4 GiB: {r:?}"));

    let mut bad = FrameHeader { seq: 1, tag: 2, payload_len: 3 }.encode();
    bad[0] = b'X';
    c.check(FrameHeader::decode(&bad).is_err(), "bad magic accepted");
}

fn rendezvous(c: &mut Checks) {
    let r = runner(512).run(&"[A-Za-z0-9:._-]{1,255}", |name| {
        let bytes = encode_request(&name).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(bytes[0] as usize, name.len());
        let back = read_request(&mut Cursor::new(bytes)).unwrap();
        prop_assert_eq!(back.map_err(|e| TestCaseError::fail(e.to_string()))?, name);
        Ok(())
    });
    c.check(r.is_ok(), format!("rendezvous request round-trip: {r:?}"));
    c.check(encode_request(&"n".repeat(256)).is_err(), "256-byte pairing name accepted");
    c.check(encode_request("").is_err(), "empty pairing name accepted");

    let r = runner(512).run(&(any::<u32>(), any::<u16>(), 0u8..3), |(ip, port, which)| {
        let resp = match which {
            0 => RdvResponse::Peer(SocketAddrV4::new(Ipv4Addr::from(ip), port)),
            1 => RdvResponse::Timeout,
            _ => RdvResponse::Malformed,
        };
        let back = RdvResponse::read_from(&mut Cursor::new(resp.encode())).unwrap();
        prop_assert_eq!(back.map_err(|e| TestCaseError::fail(e.to_string()))?, resp);
        Ok(())
    });
    c.check(r.is_ok(), format!("rendezvous response round-trip: {r:?}"));
}

fn store(c: &mut Checks) {
    let request = (0u8..4, "[a-z0-9/>._-]{0,64}", payload_len(), any::<u8>()).prop_map(|(op, key, len, seed)| match op {
        0 => Request::Put { key, value: filler(len, seed) },
        1 => Request::Get { key },
        2 => Request::Delete { key },
        _ => Request::ListCount { prefix: key },
    });
    let r = runner(256).run(&request, |req| {
        let back = Request::read_from(&mut Cursor::new(req.encode()), DDB_LIMIT as u64).unwrap();
        prop_assert_eq!(back.map_err(|e| TestCaseError::fail(e.to_string()))?, Incoming::Request(req));
        Ok(())
    });
    c.check(r.is_ok(), format!("store request round-trip: {r:?}"));

    let response = (0u8..5, payload_len(), any::<u32>(), any::<u8>()).prop_map(|(which, len, n, seed)| match which {
        0 => (Response::Ok, OP_PUT),
        1 => (Response::Value(filler(len, seed)), OP_GET),
        2 => (Response::Count(n), OP_LIST_COUNT),
        3 => (Response::NotFound, OP_DELETE),
        _ => (Response::TooLarge, OP_PUT),
    });
    let r = runner(256).run(&response, |(resp, op)| {
        let back = Response::read_from(&mut Cursor::new(resp.encode()), op).unwrap();
        prop_assert_eq!(back.map_err(|e| TestCaseError::fail(e.to_string()))?, resp);
        Ok(())
    });
    c.check(r.is_ok(), format!("store response round-trip: {r:?}"));

    // one byte over the limit is skipped and reported, not stored
    let over = Request::Put { key: "k".into(), value: filler(DDB_LIMIT + 1, 7) };
    let got = Request::read_from(&mut Cursor::new(over.encode()), DDB_LIMIT as u64).unwrap();
    c.check(
        matches!(&got, Ok(Incoming::Oversized { len, .. }) if *len == DDB_LIMIT as u64 + 1),
        format!("400001-byte PUT decoded as {got:?}"),
    );

    // a PUT announcing more than 4 GiB: the length field is exact and the
    // reader fails on the missing body instead of allocating it
    let key = "big";
    let len = 5 * FOUR_GIB + 3;
    let mut header = vec![OP_PUT];
    header.extend_from_slice(&(key.len() as u32).to_le_bytes());
    header.extend_from_slice(key.as_bytes());
    header.extend_from_slice(&len.to_le_bytes());
    let small = Request::Put { key: key.into(), value: vec![1, 2, 3] }.encode();
    c.check(
        small[..1 + 4 + key.len()] == header[..1 + 4 + key.len()] && small[8..16] == 3u64.to_le_bytes(),
        "PUT header layout differs from the hand-built one",
    );
    c.check(
        u64::from_le_bytes(header[8..16].try_into().unwrap()) == len,
        "length field above 4 GiB does not round-trip",
    );
    let truncated = Request::read_from(&mut Cursor::new(header.clone()), DDB_LIMIT as u64);
    c.check(
        truncated.as_ref().is_err_and(|e| e.kind() == IoKind::UnexpectedEof),
        format!("truncated 20 GiB PUT (limited) gave {truncated:?}"),
    );
    let mut get = vec![0u8];
    get.extend_from_slice(&len.to_le_bytes());
    let resp = Response::read_from(&mut Cursor::new(get), OP_GET);
    c.check(
        resp.as_ref().is_err_and(|e| e.kind() == IoKind::UnexpectedEof),
        format!("truncated 20 GiB GET response gave {resp:?}"),
    );
}

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    frames(c);
    rendezvous(c);
    store(c);
    Ok(())
}
