mod common;

use std::time::{Duration, Instant};

use fmi_core::mediated::{get_poll, metered_cost, KvStore, PollConfig, StoreClient};
use fmi_core::{ChannelProfile, ErrorKind};

fn client(addr: std::net::SocketAddr) -> StoreClient {
    StoreClient::connect(addr, Duration::from_secs(2)).unwrap()
}

#[test]
fn put_get_delete_list_over_tcp() {
    let (svc, core) = common::fast_store(ChannelProfile::redis());
    let mut c = client(svc.local_addr());
    assert_eq!(c.get("a/1").unwrap(), None);
    c.put("a/1", b"one").unwrap();
    c.put("a/2", b"").unwrap();
    c.put("b/1", &[7; 70_000]).unwrap();
    assert_eq!(c.get("a/1").unwrap().unwrap(), b"one");
    assert_eq!(c.get("a/2").unwrap().unwrap(), b"");
    assert_eq!(c.get("b/1").unwrap().unwrap().len(), 70_000);
    assert_eq!(c.list_count("a/").unwrap(), 2);
    assert_eq!(c.list_count("").unwrap(), 3);
    c.delete("a/1").unwrap();
    c.delete("missing").unwrap();
    assert_eq!(c.list_count("a/").unwrap(), 1);
    let l = core.ledger();
    assert_eq!((l.puts, l.gets, l.get_hits, l.lists, l.deletes), (3, 4, 3, 3, 2));
}

#[test]
fn oversized_values_are_rejected_and_the_connection_survives() {
    let (svc, core) = common::fast_store(ChannelProfile::dynamodb());
    let mut c = client(svc.local_addr());
    c.put("k", &vec![0; 400_000]).unwrap();
    let err = c.put("k2", &vec![0; 400_001]).unwrap_err();
    assert_eq!(err.kind, ErrorKind::MessageTooLarge);
    assert_eq!(c.get("k2").unwrap(), None);
    assert_eq!(core.ledger().rejected, 1);

    // a client-side limit refuses before sending
    let mut limited = client(svc.local_addr()).with_limit(10);
    assert_eq!(limited.put("x", &[0; 11]).unwrap_err().kind, ErrorKind::MessageTooLarge);
    assert_eq!(core.ledger().rejected, 1);
}

#[test]
fn injected_latency_follows_the_profile() {
    let (svc, _) = common::store(ChannelProfile::s3_table2());
    let mut c = client(svc.local_addr());
    let t = Instant::now();
    c.put("k", b"x").unwrap();
    assert!(t.elapsed() >= Duration::from_secs_f64(0.0147));
}

#[test]
fn polling_consumer_sees_a_late_producer() {
    let (svc, core) = common::fast_store(ChannelProfile::redis());
    let addr = svc.local_addr();
    let producer = std::thread::spawn(move || {
        std::thread::sleep(Duration::from_millis(60));
        client(addr).put("late", b"hi").unwrap();
    });
    let mut c = client(addr);
    let got = get_poll(&mut c, "late", &PollConfig::default()).unwrap();
    producer.join().unwrap();
    assert_eq!(got.value, b"hi");
    assert!(got.attempts > 1);
    assert!(got.slept >= Duration::from_millis(50));
    assert_eq!(core.ledger().get_hits, 1);
}

#[test]
fn ledger_prices_requests() {
    let (svc, core) = common::fast_store(ChannelProfile::dynamodb());
    let mut c = client(svc.local_addr());
    c.put("k", &[0; 2500]).unwrap();
    c.get("k").unwrap();
    c.get("none").unwrap();
    let l = core.ledger();
    assert_eq!((l.ddb_write_units, l.ddb_read_units), (3, 4));
    let p = ChannelProfile::dynamodb();
    let expect = p.price.p_ddb_u * 3 + p.price.p_ddb_d * 4;
    assert_eq!(metered_cost(&l, &p, 0.0), expect);
}
