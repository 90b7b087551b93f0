public class JoinerTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Joiner.join(new String[] {"a", "b", "c"}, ",").equals("a,b,c"), "join");
        check(Joiner.join(new String[] {}, ",").equals(""), "empty");
        check(Joiner.totalLength(new String[] {"ab", "c"}) == 3, "length");
        System.out.println("OK");
    }
}
