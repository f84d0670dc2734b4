// bench helpers live in the benches target
