package testcases.CWE89_SQL_Injection;

import testcasesupport.*;

public class CWE89_SQL_Injection__Environment_61b
{
    public String badSource() throws Throwable
    {
        return System.getenv("ADD");
    }

    public String goodG2BSource() throws Throwable
    {
        return "foo";
    }
}
